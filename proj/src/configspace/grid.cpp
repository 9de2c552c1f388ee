#include "bohm/configspace/grid.hpp"

#include <numbers>
#include <string>

#include "bohm/error.hpp"

namespace bohm::configspace {

double Axis::wavenumber(std::size_t k) const {
    const auto n = static_cast<long long>(points);
    auto signed_k = static_cast<long long>(k);
    if (signed_k >= n / 2) signed_k -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(signed_k) / extent();
}

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() > 2)
        throw InvalidArgument("grid must have 1 or 2 dimensions, got " + std::to_string(axes_.size()));
    size_ = 1;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        const Axis& ax = axes_[a];
        const std::string name = "grid axis " + std::to_string(a);
        if (!(ax.max > ax.min) || !std::isfinite(ax.min) || !std::isfinite(ax.max))
            throw InvalidArgument(name + ": extent must satisfy min < max");
        if (ax.points < 16) throw InvalidArgument(name + ": at least 16 points required");
        if ((ax.points & (ax.points - 1)) != 0)
            throw InvalidArgument(name + ": point count must be a power of two");
        size_ *= ax.points;
    }
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.spacing();
    return v;
}

double Grid::volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.extent();
    return v;
}

Point Grid::point(std::size_t flat) const {
    if (dims() == 1) return {axes_[0].coord(flat), 0.0};
    const std::size_t n1 = axes_[1].points;
    return {axes_[0].coord(flat / n1), axes_[1].coord(flat % n1)};
}

Point Grid::wrap(Point p) const {
    for (std::size_t a = 0; a < dims(); ++a) p[a] = axes_[a].wrap(p[a]);
    return p;
}

bool Grid::contains(const Point& p) const {
    for (std::size_t a = 0; a < dims(); ++a)
        if (!axes_[a].contains(p[a])) return false;
    return true;
}

std::vector<double> Grid::wavenumbers(std::size_t axis) const {
    std::vector<double> k(size_);
    if (dims() == 1) {
        for (std::size_t i = 0; i < size_; ++i) k[i] = axes_[0].wavenumber(i);
        return k;
    }
    const std::size_t n0 = axes_[0].points, n1 = axes_[1].points;
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j)
            k[i * n1 + j] = axis == 0 ? axes_[0].wavenumber(i) : axes_[1].wavenumber(j);
    return k;
}

bool Grid::operator==(const Grid& other) const {
    if (dims() != other.dims()) return false;
    for (std::size_t a = 0; a < dims(); ++a) {
        const Axis &x = axes_[a], &y = other.axes_[a];
        if (x.min != y.min || x.max != y.max || x.points != y.points) return false;
    }
    return true;
}

}  // namespace bohm::configspace
