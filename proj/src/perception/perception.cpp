#include "bohm/perception/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "bohm/configspace/spectral_density.hpp"
#include "bohm/detail/overloaded.hpp"
#include "bohm/detail/text.hpp"

namespace bohm::perception {

namespace {

using Span = std::pair<double, double>;

void check_bounds(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi)) throw InvalidArgument("region bound is NaN");
    if (!(lo < hi)) throw InvalidArgument("region part needs lo < hi");
}

std::vector<Span> merge(std::vector<Span> parts) {
    std::sort(parts.begin(), parts.end());
    std::vector<Span> out;
    for (const auto& s : parts) {
        if (!out.empty() && s.first <= out.back().second) out.back().second = std::max(out.back().second, s.second);
        else out.push_back(s);
    }
    return out;
}

Box clip(const Box& b, const Grid& g) {
    Box c = b;
    for (std::size_t a = 0; a < g.dims(); ++a) {
        c.lo[a] = std::max(b.lo[a], g.axis(a).min);
        c.hi[a] = std::min(b.hi[a], g.axis(a).max);
    }
    return c;
}

bool empty_box(const Box& b, std::size_t dims) {
    for (std::size_t a = 0; a < dims; ++a)
        if (!(b.lo[a] < b.hi[a])) return true;
    return false;
}

}  // namespace

Region Region::intervals(const std::vector<std::pair<double, double>>& parts) {
    if (parts.empty()) throw InvalidArgument("region needs at least one interval");
    for (const auto& [lo, hi] : parts) check_bounds(lo, hi);
    Region r;
    r.dims_ = 1;
    for (const auto& [lo, hi] : merge(parts)) r.boxes_.push_back(Box{{lo, 0.0}, {hi, 0.0}});
    return r;
}

Region Region::rectangles(const std::vector<Box>& parts) {
    if (parts.empty()) throw InvalidArgument("region needs at least one rectangle");
    std::vector<double> xs;
    for (const auto& b : parts) {
        check_bounds(b.lo[0], b.hi[0]);
        check_bounds(b.lo[1], b.hi[1]);
        xs.push_back(b.lo[0]);
        xs.push_back(b.hi[0]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    // Sweep the x breakpoints: each slab gets the merged y cover of the
    // rectangles spanning it; neighbouring slabs with equal covers fuse.
    Region r;
    r.dims_ = 2;
    std::vector<Span> open_cover;
    double open_x = 0.0;
    auto flush = [&](double x_end) {
        for (const auto& [y0, y1] : open_cover) r.boxes_.push_back(Box{{open_x, y0}, {x_end, y1}});
    };
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        std::vector<Span> ys;
        for (const auto& b : parts)
            if (b.lo[0] <= xs[k] && b.hi[0] >= xs[k + 1]) ys.emplace_back(b.lo[1], b.hi[1]);
        ys = merge(std::move(ys));
        if (ys != open_cover) {
            flush(xs[k]);
            open_cover = std::move(ys);
            open_x = xs[k];
        }
    }
    flush(xs.back());
    return r;
}

Region Region::whole(const Grid& grid) {
    if (grid.dims() == 1) return intervals({{grid.axis(0).min, grid.axis(0).max}});
    return rectangles({Box{{grid.axis(0).min, grid.axis(1).min}, {grid.axis(0).max, grid.axis(1).max}}});
}

double Region::measure() const {
    double acc = 0.0;
    for (const auto& b : boxes_) acc += dims_ == 1 ? b.hi[0] - b.lo[0] : (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]);
    return acc;
}

bool Region::contains(const Point& x) const {
    for (const auto& b : boxes_) {
        bool in = true;
        for (std::size_t a = 0; a < dims_; ++a) in = in && b.lo[a] <= x[a] && x[a] < b.hi[a];
        if (in) return true;
    }
    return false;
}

bool Region::overlaps(const Region& other) const {
    for (const auto& a : boxes_)
        for (const auto& b : other.boxes_) {
            bool hit = true;
            for (std::size_t d = 0; d < dims_; ++d) hit = hit && std::max(a.lo[d], b.lo[d]) < std::min(a.hi[d], b.hi[d]);
            if (hit) return true;
        }
    return false;
}

PerceptionSet::PerceptionSet(std::vector<Perception> perceptions) {
    for (auto& p : perceptions) add(std::move(p));
}

void PerceptionSet::add(Perception p) {
    if (p.id.empty()) throw InvalidArgument("perception id must be nonempty");
    if (!(p.prior_weight > 0.0) || !std::isfinite(p.prior_weight))
        throw InvalidArgument("perception '" + p.id + "' needs a positive prior weight");
    if (!std::isfinite(p.t)) throw InvalidArgument("perception '" + p.id + "' has a non-finite time");
    if (p.region.boxes().empty()) throw InvalidArgument("perception '" + p.id + "' has an empty region");
    if (!items_.empty() && items_.front().region.dims() != p.region.dims())
        throw InvalidArgument("perception '" + p.id + "' mixes region dimensions");
    for (const auto& q : items_)
        if (q.id == p.id) throw InvalidArgument("duplicate perception id '" + p.id + "'");
    items_.push_back(std::move(p));
}

const Perception& PerceptionSet::find(const std::string& id) const {
    for (const auto& p : items_)
        if (p.id == id) return p;
    throw InvalidArgument("no perception with id '" + id + "'");
}

std::vector<double> PerceptionSet::times() const {
    std::set<double> ts;
    for (const auto& p : items_) ts.insert(p.t);
    return {ts.begin(), ts.end()};
}

TheoryModel TheoryModel::sqm(std::shared_ptr<const WavefunctionHistory> h) { return {SqmTheory{}, std::move(h)}; }
TheoryModel TheoryModel::sbm(std::shared_ptr<const WavefunctionHistory> h, Trajectory traj) {
    return {SbmTheory{std::move(traj)}, std::move(h)};
}
TheoryModel TheoryModel::scbm(std::shared_ptr<const WavefunctionHistory> h, Ensemble ens) {
    return {ScbmTheory{std::move(ens)}, std::move(h)};
}
TheoryModel TheoryModel::gcbm(std::shared_ptr<const WavefunctionHistory> h, Ensemble ens) {
    return {GcbmTheory{std::move(ens)}, std::move(h)};
}

std::string TheoryModel::tag() const {
    return std::visit(detail::overloaded{
                          [](const SqmTheory&) { return std::string("SQM"); },
                          [](const SbmTheory&) { return std::string("SBM"); },
                          [](const ScbmTheory&) { return std::string("SCBM"); },
                          [](const GcbmTheory&) { return std::string("GCBM"); },
                      },
                      kind);
}

void TheoryModel::check_covers(double t) const {
    const auto fail = [&](const char* what) {
        throw OutOfRange("perception time " + std::to_string(t) + " outside the " + what + " of the " + tag() +
                         " theory");
    };
    if (history && !history->covers(t)) fail("evolved range");
    const auto range = [&](const Trajectory& tr) {
        const double tol = 1e-9 * std::max(1.0, std::abs(tr.t_end()));
        if (t < tr.t_begin() - tol || t > tr.t_end() + tol) fail("trajectory range");
    };
    std::visit(detail::overloaded{
                   [&](const SqmTheory&) {
                       if (!history) throw InvalidArgument("SQM theory needs a wavefunction history");
                   },
                   [&](const SbmTheory& s) { range(s.trajectory); },
                   [&](const ScbmTheory& s) { range(s.ensemble.trajectories.front()); },
                   [&](const GcbmTheory& s) { range(s.ensemble.trajectories.front()); },
               },
               kind);
}

double sqm_measure_density(const Perception& p, const WavefunctionHistory& history) {
    const auto spec = history.spectral_density_at(p.t);
    const Grid& g = history.grid();
    if (p.region.dims() != g.dims()) throw InvalidArgument("perception '" + p.id + "' has the wrong dimension");
    double m = 0.0;
    for (const auto& b : p.region.boxes()) {
        const Box c = clip(b, g);
        if (empty_box(c, g.dims())) continue;
        m += g.dims() == 1 ? spec->interval_mass(c.lo[0], c.hi[0]) : spec->box_mass(c.lo, c.hi);
    }
    return std::clamp(m, 0.0, 1.0);
}

double sbm_measure_density(const Perception& p, const Trajectory& traj) {
    return p.region.contains(traj.position_at(p.t)) ? 1.0 : 0.0;
}

MeasureValue scbm_measure_density(const Perception& p, const Ensemble& ens) {
    if (ens.trajectories.empty()) throw InvalidArgument("ensemble is empty");
    std::size_t hits = 0;
    for (const auto& tr : ens.trajectories) hits += p.region.contains(tr.position_at(p.t));
    const double n = static_cast<double>(ens.size());
    const double m = static_cast<double>(hits) / n;
    return {m, std::sqrt(m * (1.0 - m) / n)};
}

MeasureValue measure_density(const Perception& p, const TheoryModel& theory) {
    theory.check_covers(p.t);
    return std::visit(detail::overloaded{
                          [&](const SqmTheory&) { return MeasureValue{sqm_measure_density(p, *theory.history), 0.0}; },
                          [&](const SbmTheory& s) { return MeasureValue{sbm_measure_density(p, s.trajectory), 0.0}; },
                          [&](const ScbmTheory& s) { return scbm_measure_density(p, s.ensemble); },
                          [&](const GcbmTheory& s) { return scbm_measure_density(p, s.ensemble); },
                      },
                      theory.kind);
}

double set_measure(const PerceptionSet& s, const TheoryModel& theory) {
    double acc = 0.0;
    for (const auto& p : s.perceptions()) acc += p.prior_weight * measure_density(p, theory).m;
    return acc;
}

std::vector<double> uniform_edges(const configspace::Axis& axis, std::size_t count) {
    if (count == 0) throw InvalidArgument("need at least one cell per axis");
    std::vector<double> e(count + 1);
    for (std::size_t i = 0; i < count; ++i)
        e[i] = axis.min + axis.extent() * static_cast<double>(i) / static_cast<double>(count);
    e[count] = axis.max;
    return e;
}

PerceptionSet build_perception_family(const Grid& grid, const FamilySpec& spec) {
    if (spec.times.empty()) throw InvalidArgument("perception family needs at least one time");
    std::vector<Region> cells = spec.cells;
    if (cells.empty()) {
        for (std::size_t a = 0; a < grid.dims(); ++a) {
            const auto& e = spec.edges[a];
            if (e.size() < 2) throw InvalidArgument("axis " + std::to_string(a) + " needs at least two cell edges");
            for (std::size_t i = 1; i < e.size(); ++i)
                if (!(e[i] > e[i - 1])) throw InvalidArgument("cell edges on axis " + std::to_string(a) + " overlap");
            if (e.front() != grid.axis(a).min || e.back() != grid.axis(a).max)
                throw InvalidArgument("cell edges on axis " + std::to_string(a) + " do not tile the domain");
        }
        if (grid.dims() == 1) {
            for (std::size_t i = 0; i + 1 < spec.edges[0].size(); ++i)
                cells.push_back(Region::intervals({{spec.edges[0][i], spec.edges[0][i + 1]}}));
        } else {
            for (std::size_t i = 0; i + 1 < spec.edges[0].size(); ++i)
                for (std::size_t j = 0; j + 1 < spec.edges[1].size(); ++j)
                    cells.push_back(Region::rectangles(
                        {Box{{spec.edges[0][i], spec.edges[1][j]}, {spec.edges[0][i + 1], spec.edges[1][j + 1]}}}));
        }
    } else {
        const Region domain = Region::whole(grid);
        double covered = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].dims() != grid.dims()) throw InvalidArgument("cell " + std::to_string(i) + " has the wrong dimension");
            for (const auto& b : cells[i].boxes())
                for (std::size_t a = 0; a < grid.dims(); ++a)
                    if (b.lo[a] < grid.axis(a).min || b.hi[a] > grid.axis(a).max)
                        throw InvalidArgument("cell " + std::to_string(i) + " extends past the domain");
            for (std::size_t j = 0; j < i; ++j)
                if (cells[i].overlaps(cells[j]))
                    throw InvalidArgument("cells " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
            covered += cells[i].measure();
        }
        if (std::abs(covered - domain.measure()) > 1e-9 * domain.measure())
            throw InvalidArgument("cells do not tile the domain");
    }
    if (!spec.priors.empty() && spec.priors.size() != cells.size())
        throw InvalidArgument("need one prior weight per cell (" + std::to_string(cells.size()) + ")");

    PerceptionSet out;
    for (std::size_t k = 0; k < spec.times.size(); ++k)
        for (std::size_t i = 0; i < cells.size(); ++i)
            out.add(Perception{spec.id_prefix + std::to_string(k) + "_" + std::to_string(i), spec.times[k], cells[i],
                               spec.priors.empty() ? 1.0 : spec.priors[i]});
    return out;
}

nlohmann::json to_json(const PerceptionSet& s) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& p : s.perceptions()) {
        nlohmann::json region = nlohmann::json::array();
        for (const auto& b : p.region.boxes()) {
            if (p.region.dims() == 1) region.push_back({b.lo[0], b.hi[0]});
            else region.push_back({b.lo[0], b.hi[0], b.lo[1], b.hi[1]});
        }
        list.push_back({{"id", p.id}, {"t", p.t}, {"region", region}, {"prior_weight", p.prior_weight}});
    }
    return {{"perceptions", list}};
}

PerceptionSet perceptions_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("perceptions") || !j["perceptions"].is_array())
        throw InvalidArgument("perceptions: expected an array");
    PerceptionSet out;
    const auto& list = j["perceptions"];
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "perceptions[" + std::to_string(i) + "]";
        const auto& e = list[i];
        try {
            if (!e.is_object()) throw InvalidArgument("expected an object");
            if (!e.contains("id") || !e["id"].is_string()) throw InvalidArgument("id: expected a string");
            if (!e.contains("t") || !e["t"].is_number()) throw InvalidArgument("t: expected a number");
            if (!e.contains("region") || !e["region"].is_array() || e["region"].empty())
                throw InvalidArgument("region: expected a nonempty array");
            double w = 1.0;
            if (e.contains("prior_weight")) {
                if (!e["prior_weight"].is_number()) throw InvalidArgument("prior_weight: expected a number");
                w = e["prior_weight"].get<double>();
            }
            const auto& parts = e["region"];
            const std::size_t arity = parts[0].is_array() ? parts[0].size() : 0;
            if (arity != 2 && arity != 4) throw InvalidArgument("region: parts are [lo, hi] or [x0, x1, y0, y1]");
            std::vector<std::pair<double, double>> spans;
            std::vector<Box> boxes;
            for (const auto& part : parts) {
                if (!part.is_array() || part.size() != arity)
                    throw InvalidArgument("region: parts must all have " + std::to_string(arity) + " numbers");
                for (const auto& v : part)
                    if (!v.is_number()) throw InvalidArgument("region: bounds must be numbers");
                if (arity == 2) spans.emplace_back(part[0].get<double>(), part[1].get<double>());
                else boxes.push_back(Box{{part[0].get<double>(), part[2].get<double>()},
                                         {part[1].get<double>(), part[3].get<double>()}});
            }
            out.add(Perception{e["id"].get<std::string>(), e["t"].get<double>(),
                               arity == 2 ? Region::intervals(spans) : Region::rectangles(boxes), w});
        } catch (const InvalidArgument& err) {
            throw InvalidArgument(path + "." + err.what());
        }
    }
    return out;
}

std::vector<MeasureRow> measure_table(const PerceptionSet& s, const TheoryModel& theory) {
    std::vector<MeasureRow> rows;
    for (const auto& p : s.perceptions()) rows.push_back({p.id, theory.tag(), measure_density(p, theory)});
    return rows;
}

void write_measure_csv(std::ostream& out, const std::vector<MeasureRow>& rows,
                       std::optional<std::uint64_t> config_hash) {
    if (config_hash) out << "# config_hash=" << detail::format_hash(*config_hash) << '\n';
    out << "id,theory,m,std_error\n";
    for (const auto& r : rows)
        out << r.id << ',' << r.theory << ',' << detail::format_double(r.value.m) << ','
            << detail::format_double(r.value.std_error) << '\n';
}

}  // namespace bohm::perception
