#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bohm/perception/perception.hpp"
#include "json.hpp"

namespace bohm::inference {

using perception::Perception;
using perception::PerceptionSet;
using perception::TheoryModel;

// The theory gives the whole perception set zero measure.
class ZeroMeasureError : public Error {
public:
    ZeroMeasureError() : Error("theory assigns zero total measure") {}
};

// T(p) = sum of w'm' over p' with m' <= m(p), divided by sum of w'm'.
// Equal m values are all inside the "<=" set; m = 0 gives T = 0. Sums run
// over perceptions sorted by m (ties by index), so the maximal-m group gets
// exactly 1 and T is monotone in m. Throws ZeroMeasureError if sum w m = 0.
std::vector<double> typicality_values(const std::vector<double>& weights, const std::vector<double>& m);

// Replaceable rule mapping (weights, m) to typicalities.
using TypicalityFunctional =
    std::function<std::vector<double>(const std::vector<double>& weights, const std::vector<double>& m)>;

struct TypicalityEntry {
    std::string id;
    double m = 0.0;
    double std_error = 0.0;  // nonzero only for ensemble theories
    double typicality = 0.0;
    double band = 0.0;  // 3-sigma Monte Carlo band; ensemble theories only
};

struct TypicalityReport {
    std::string theory;
    double total_measure = 0.0;
    std::size_t samples = 0;  // ensemble size, 0 for SQM/SBM
    std::vector<TypicalityEntry> entries;

    const TypicalityEntry& find(const std::string& id) const;
    nlohmann::json to_json() const;
};

// For ensemble theories each entry also carries a band: the half-width of
// the 3-sigma Wilson score interval around T with N trials, plus the
// weighted mass (over the total) of perceptions whose order relative to p
// is not resolved at 3 sigma,
// where two estimates are unresolved when |m1 - m2| <= 3 sqrt((m1 + m2 -
// (m1 - m2)^2) / N), the multinomial spread of their difference.
TypicalityReport typicality(const PerceptionSet& s, const TheoryModel& theory,
                            const TypicalityFunctional& rule = typicality_values);

struct TheoryEntry {
    std::string tag;
    double prior = 0.0;
    double likelihood = 0.0;
    double posterior = 0.0;
};

struct TheoryComparison {
    std::string observed;
    std::vector<TheoryEntry> theories;
    nlohmann::json to_json() const;
};

// posterior_i = prior_i L_i / sum_j prior_j L_j. Throws InvalidArgument for
// non-positive priors and Error("observation impossible under every
// candidate theory") when every product is zero.
std::vector<double> posterior_weights(const std::vector<double>& priors, const std::vector<double>& likelihoods);

// The likelihood of a theory is the typicality of the observed perception
// under it; a theory giving the observation (or the whole set) zero measure
// has likelihood 0.
TheoryComparison compare_theories(const std::string& observed, const PerceptionSet& s,
                                  const std::vector<std::pair<TheoryModel, double>>& theories);

struct AgreementRow {
    std::string id;
    double m_sqm = 0.0;
    double t_sqm = 0.0;
    double m_scbm = 0.0;
    double std_error = 0.0;
    double t_scbm = 0.0;
    double band = 0.0;
    bool within = false;  // |t_scbm - t_sqm| <= band
};

struct SbmTypicality {
    std::size_t member = 0;  // ensemble index of the trajectory
    std::vector<double> typicality;  // per perception, same order as rows
    bool diverges = false;           // some |T_SBM - T_SQM| exceeds the band
};

struct AgreementReport {
    std::size_t samples = 0;
    std::vector<AgreementRow> rows;
    std::vector<SbmTypicality> sbm;

    double fraction_within() const;
    double max_deviation() const;
    bool sbm_divergence() const;
    nlohmann::json to_json() const;
};

// SCBM vs SQM typicality for every perception, plus the SBM typicalities of
// the first `sbm_members` ensemble members taken as single-trajectory
// theories. A single-trajectory theory that misses every perception is
// reported with all-zero typicalities.
AgreementReport typicality_agreement_experiment(const PerceptionSet& s,
                                                std::shared_ptr<const configspace::WavefunctionHistory> history,
                                                const ensemble::Ensemble& ens, std::size_t sbm_members = 3);

// CSV writers: id,theory,m,std_error,typicality,band / theory,prior,likelihood,posterior /
// id,m_sqm,t_sqm,m_scbm,std_error,t_scbm,band,within.
void write_typicality_csv(std::ostream& out, const TypicalityReport& r, std::optional<std::uint64_t> config_hash = {});
void write_comparison_csv(std::ostream& out, const TheoryComparison& c, std::optional<std::uint64_t> config_hash = {});
void write_agreement_csv(std::ostream& out, const AgreementReport& r, std::optional<std::uint64_t> config_hash = {});

}  // namespace bohm::inference
