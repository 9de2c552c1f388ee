#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bohm/ensemble/ensemble.hpp"
#include "json.hpp"

namespace bohm::perception {

using configspace::Grid;
using configspace::WavefunctionHistory;
using ensemble::Ensemble;
using pilotwave::Trajectory;

// Half-open box [lo, hi) per axis; 1D boxes ignore axis 1.
struct Box {
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};
    bool operator==(const Box&) const = default;
};

// Finite union of half-open intervals (1D) or rectangles (2D), stored as
// pairwise-disjoint boxes in a canonical order.
class Region {
public:
    // Throws InvalidArgument on empty input, lo >= hi or non-finite bounds.
    static Region intervals(const std::vector<std::pair<double, double>>& parts);
    static Region rectangles(const std::vector<Box>& parts);
    static Region whole(const Grid& grid);

    std::size_t dims() const { return dims_; }
    const std::vector<Box>& boxes() const { return boxes_; }
    double measure() const;
    bool contains(const Point& x) const;
    // Positive-measure overlap with another region of the same dimension.
    bool overlaps(const Region& other) const;
    bool operator==(const Region&) const = default;

private:
    std::size_t dims_ = 1;
    std::vector<Box> boxes_;
};

struct Perception {
    std::string id;
    double t = 0.0;
    Region region;
    double prior_weight = 1.0;
};

class PerceptionSet {
public:
    PerceptionSet() = default;
    // Throws InvalidArgument on duplicate ids, non-positive weights or mixed dimensions.
    explicit PerceptionSet(std::vector<Perception> perceptions);

    void add(Perception p);
    const std::vector<Perception>& perceptions() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const Perception& at(std::size_t i) const { return items_.at(i); }
    // Throws InvalidArgument for an unknown id.
    const Perception& find(const std::string& id) const;
    std::vector<double> times() const;

private:
    std::vector<Perception> items_;
};

struct SqmTheory {};
struct SbmTheory {
    Trajectory trajectory;
};
struct ScbmTheory {
    Ensemble ensemble;
};
// A transported ensemble whose seed density was not |psi|^2.
struct GcbmTheory {
    Ensemble ensemble;
};

// One of the four theories together with the shared wavefunction history.
struct TheoryModel {
    std::variant<SqmTheory, SbmTheory, ScbmTheory, GcbmTheory> kind;
    std::shared_ptr<const WavefunctionHistory> history;

    static TheoryModel sqm(std::shared_ptr<const WavefunctionHistory> h);
    static TheoryModel sbm(std::shared_ptr<const WavefunctionHistory> h, Trajectory traj);
    static TheoryModel scbm(std::shared_ptr<const WavefunctionHistory> h, Ensemble ens);
    static TheoryModel gcbm(std::shared_ptr<const WavefunctionHistory> h, Ensemble ens);

    std::string tag() const;
    // Throws OutOfRange unless the history and any trajectories cover t.
    void check_covers(double t) const;
};

struct MeasureValue {
    double m = 0.0;
    double std_error = 0.0;
};

// Integral of |psi(x, t_p)|^2 over the region, clamped to [0, 1].
double sqm_measure_density(const Perception& p, const WavefunctionHistory& history);
// 1 if the trajectory at t_p lies in the region, else 0.
double sbm_measure_density(const Perception& p, const Trajectory& traj);
// Fraction of members inside the region with binomial standard error.
MeasureValue scbm_measure_density(const Perception& p, const Ensemble& ens);
MeasureValue measure_density(const Perception& p, const TheoryModel& theory);

// sum_p prior_weight(p) * m(p).
double set_measure(const PerceptionSet& s, const TheoryModel& theory);

// Partition of the grid domain at each listed time. Cells come either from
// per-axis edges (a tensor grid) or from an explicit list of regions.
struct FamilySpec {
    std::vector<double> times;
    std::array<std::vector<double>, 2> edges;  // used when `cells` is empty
    std::vector<Region> cells;
    std::vector<double> priors;  // one per cell; empty means all 1
    std::string id_prefix = "p";
};

// `count` equal cells along the axis.
std::vector<double> uniform_edges(const configspace::Axis& axis, std::size_t count);

// Ids are <prefix><time index>_<cell index>. Throws InvalidArgument when the
// cells overlap or do not tile the domain.
PerceptionSet build_perception_family(const Grid& grid, const FamilySpec& spec);

// {"perceptions": [{"id", "t", "region": [[lo, hi], ...] or
// [[x0, x1, y0, y1], ...], "prior_weight"}]}
nlohmann::json to_json(const PerceptionSet& s);
PerceptionSet perceptions_from_json(const nlohmann::json& j);

struct MeasureRow {
    std::string id;
    std::string theory;
    MeasureValue value;
};

std::vector<MeasureRow> measure_table(const PerceptionSet& s, const TheoryModel& theory);
// CSV with columns id,theory,m,std_error.
void write_measure_csv(std::ostream& out, const std::vector<MeasureRow>& rows,
                       std::optional<std::uint64_t> config_hash = {});

}  // namespace bohm::perception
