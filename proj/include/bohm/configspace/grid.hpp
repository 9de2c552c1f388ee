#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace bohm {

// A point in configuration space; only the first `dims` components are used.
using Point = std::array<double, 2>;

namespace configspace {

// One periodic axis: points sit at min + i*spacing for i in [0, points).
struct Axis {
    double min = 0.0;
    double max = 1.0;
    std::size_t points = 16;

    double extent() const { return max - min; }
    double spacing() const { return extent() / static_cast<double>(points); }
    double coord(std::size_t i) const { return min + static_cast<double>(i) * spacing(); }
    // Maps any coordinate into [min, max).
    double wrap(double x) const {
        double u = std::fmod(x - min, extent());
        if (u < 0.0) u += extent();
        if (u >= extent()) u = 0.0;
        return min + u;
    }
    bool contains(double x) const { return x >= min && x < max; }
    // Angular wavenumber of FFT bin k (standard FFT ordering).
    double wavenumber(std::size_t k) const;
};

// Uniform periodic grid in one or two dimensions. Flattened storage is
// row-major with axis 0 slowest.
class Grid {
public:
    // Throws InvalidArgument unless dims is 1 or 2, each axis has a power-of-two
    // point count >= 16 and max > min.
    explicit Grid(std::vector<Axis> axes);

    static Grid line(double min, double max, std::size_t points) { return Grid({{min, max, points}}); }

    std::size_t dims() const { return axes_.size(); }
    const Axis& axis(std::size_t a) const { return axes_[a]; }
    const std::vector<Axis>& axes() const { return axes_; }
    std::size_t size() const { return size_; }
    // Volume element dx (1D) or dx*dy (2D).
    double cell_volume() const;
    // Total length (1D) or area (2D).
    double volume() const;

    std::size_t index(std::size_t i0, std::size_t i1 = 0) const {
        return dims() == 1 ? i0 : i0 * axes_[1].points + i1;
    }
    Point point(std::size_t flat) const;
    Point wrap(Point p) const;
    bool contains(const Point& p) const;

    // Wavenumber of every flattened FFT bin along `axis`.
    std::vector<double> wavenumbers(std::size_t axis) const;

    bool operator==(const Grid& other) const;

private:
    std::vector<Axis> axes_;
    std::size_t size_ = 0;
};

}  // namespace configspace
}  // namespace bohm
