#include "bohm/inference/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "bohm/detail/overloaded.hpp"
#include "bohm/detail/text.hpp"

namespace bohm::inference {

namespace {

std::size_t ensemble_size(const TheoryModel& theory) {
    return std::visit(detail::overloaded{
                          [](const perception::ScbmTheory& t) { return t.ensemble.size(); },
                          [](const perception::GcbmTheory& t) { return t.ensemble.size(); },
                          [](const auto&) { return std::size_t{0}; },
                      },
                      theory.kind);
}

// Largest distance from `p` to either end of the 3-sigma Wilson score
// interval; stays positive at p = 0 and p = 1.
double wilson_halfwidth(double p, double n) {
    const double z2 = 9.0;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = 3.0 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return std::max(centre + half - p, p - (centre - half));
}

void hash_line(std::ostream& out, std::optional<std::uint64_t> h) {
    if (h) out << "# config_hash=" << detail::format_hash(*h) << '\n';
}

}  // namespace

std::vector<double> typicality_values(const std::vector<double>& weights, const std::vector<double>& m) {
    if (weights.size() != m.size()) throw InvalidArgument("need one weight per measure density");
    const std::size_t n = m.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m[a] < m[b]; });

    std::vector<double> t(n, 0.0);
    double acc = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        for (; j < n && m[order[j]] == m[order[i]]; ++j) acc += weights[order[j]] * m[order[j]];
        for (std::size_t k = i; k < j; ++k) t[order[k]] = acc;
        i = j;
    }
    if (!(acc > 0.0)) throw ZeroMeasureError();
    for (std::size_t k = 0; k < n; ++k) t[k] = m[k] > 0.0 ? t[k] / acc : 0.0;
    return t;
}

const TypicalityEntry& TypicalityReport::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return e;
    throw InvalidArgument("no perception with id '" + id + "' in the report");
}

nlohmann::json TypicalityReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json row{{"id", e.id}, {"m", e.m}, {"typicality", e.typicality}};
        if (samples > 0) {
            row["std_error"] = e.std_error;
            row["band"] = e.band;
        }
        list.push_back(row);
    }
    nlohmann::json j{{"theory", theory}, {"total_measure", total_measure}, {"perceptions", list}};
    if (samples > 0) j["N"] = samples;
    return j;
}

TypicalityReport typicality(const PerceptionSet& s, const TheoryModel& theory, const TypicalityFunctional& rule) {
    if (s.empty()) throw InvalidArgument("typicality needs a nonempty perception set");
    TypicalityReport rep;
    rep.theory = theory.tag();
    rep.samples = ensemble_size(theory);
    std::vector<double> w, m;
    for (const auto& p : s.perceptions()) {
        const auto v = perception::measure_density(p, theory);
        rep.entries.push_back({p.id, v.m, v.std_error, 0.0, 0.0});
        w.push_back(p.prior_weight);
        m.push_back(v.m);
    }
    const auto t = rule(w, m);
    for (std::size_t i = 0; i < t.size(); ++i) {
        rep.entries[i].typicality = t[i];
        rep.total_measure += w[i] * m[i];
    }
    if (rep.samples == 0) return rep;

    const double n = static_cast<double>(rep.samples);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double unresolved = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j == i) continue;
            const double diff = m[i] - m[j];
            const double spread = std::sqrt(std::max(0.0, m[i] + m[j] - diff * diff) / n);
            if (std::abs(diff) <= 3.0 * spread) unresolved += w[j] * m[j];
        }
        rep.entries[i].band = wilson_halfwidth(t[i], n) + unresolved / rep.total_measure;
    }
    return rep;
}

nlohmann::json TheoryComparison::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& t : theories)
        list.push_back({{"theory", t.tag}, {"prior", t.prior}, {"likelihood", t.likelihood}, {"posterior", t.posterior}});
    return {{"observed", observed}, {"theories", list}};
}

std::vector<double> posterior_weights(const std::vector<double>& priors, const std::vector<double>& likelihoods) {
    if (priors.size() != likelihoods.size() || priors.empty())
        throw InvalidArgument("need one likelihood per prior and at least one theory");
    std::vector<double> post(priors.size());
    double total = 0.0;
    for (std::size_t i = 0; i < priors.size(); ++i) {
        if (!(priors[i] > 0.0) || !std::isfinite(priors[i])) throw InvalidArgument("theory priors must be positive");
        if (!(likelihoods[i] >= 0.0)) throw InvalidArgument("likelihoods must be nonnegative");
        total += post[i] = priors[i] * likelihoods[i];
    }
    if (!(total > 0.0)) throw Error("observation impossible under every candidate theory");
    for (auto& p : post) p /= total;
    return post;
}

TheoryComparison compare_theories(const std::string& observed, const PerceptionSet& s,
                                  const std::vector<std::pair<TheoryModel, double>>& theories) {
    s.find(observed);
    TheoryComparison out;
    out.observed = observed;
    std::vector<double> priors, likelihoods;
    for (const auto& [theory, prior] : theories) {
        double l = 0.0;
        try {
            l = typicality(s, theory).find(observed).typicality;
        } catch (const ZeroMeasureError&) {
            l = 0.0;
        }
        out.theories.push_back({theory.tag(), prior, l, 0.0});
        priors.push_back(prior);
        likelihoods.push_back(l);
    }
    const auto post = posterior_weights(priors, likelihoods);
    for (std::size_t i = 0; i < post.size(); ++i) out.theories[i].posterior = post[i];
    return out;
}

double AgreementReport::fraction_within() const {
    if (rows.empty()) return 0.0;
    const auto n = std::count_if(rows.begin(), rows.end(), [](const AgreementRow& r) { return r.within; });
    return static_cast<double>(n) / static_cast<double>(rows.size());
}

double AgreementReport::max_deviation() const {
    double d = 0.0;
    for (const auto& r : rows) d = std::max(d, std::abs(r.t_scbm - r.t_sqm));
    return d;
}

bool AgreementReport::sbm_divergence() const {
    return std::any_of(sbm.begin(), sbm.end(), [](const SbmTypicality& s) { return s.diverges; });
}

nlohmann::json AgreementReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : rows)
        list.push_back({{"id", r.id},
                        {"m_sqm", r.m_sqm},
                        {"t_sqm", r.t_sqm},
                        {"m_scbm", r.m_scbm},
                        {"std_error", r.std_error},
                        {"t_scbm", r.t_scbm},
                        {"band", r.band},
                        {"within", r.within}});
    nlohmann::json sbm_list = nlohmann::json::array();
    for (const auto& s : sbm)
        sbm_list.push_back({{"member", s.member}, {"typicality", s.typicality}, {"diverges", s.diverges}});
    return {{"N", samples},
            {"fraction_within", fraction_within()},
            {"max_deviation", max_deviation()},
            {"sbm_divergence", sbm_divergence()},
            {"perceptions", list},
            {"sbm", sbm_list}};
}

AgreementReport typicality_agreement_experiment(const PerceptionSet& s,
                                                std::shared_ptr<const configspace::WavefunctionHistory> history,
                                                const ensemble::Ensemble& ens, std::size_t sbm_members) {
    const auto sqm = typicality(s, TheoryModel::sqm(history));
    const auto scbm = typicality(s, TheoryModel::scbm(history, ens));
    AgreementReport rep;
    rep.samples = ens.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& q = sqm.entries[i];
        const auto& c = scbm.entries[i];
        rep.rows.push_back({q.id, q.m, q.typicality, c.m, c.std_error, c.typicality, c.band,
                            std::abs(c.typicality - q.typicality) <= c.band});
    }
    for (std::size_t k = 0; k < std::min(sbm_members, ens.size()); ++k) {
        SbmTypicality row;
        row.member = k;
        try {
            const auto r = typicality(s, TheoryModel::sbm(history, ens.trajectories[k]));
            for (const auto& e : r.entries) row.typicality.push_back(e.typicality);
        } catch (const ZeroMeasureError&) {
            row.typicality.assign(s.size(), 0.0);
        }
        for (std::size_t i = 0; i < s.size(); ++i)
            row.diverges = row.diverges || std::abs(row.typicality[i] - rep.rows[i].t_sqm) > rep.rows[i].band;
        rep.sbm.push_back(std::move(row));
    }
    return rep;
}

void write_typicality_csv(std::ostream& out, const TypicalityReport& r, std::optional<std::uint64_t> config_hash) {
    hash_line(out, config_hash);
    out << "id,theory,m,std_error,typicality,band\n";
    for (const auto& e : r.entries)
        out << e.id << ',' << r.theory << ',' << detail::format_double(e.m) << ',' << detail::format_double(e.std_error)
            << ',' << detail::format_double(e.typicality) << ',' << detail::format_double(e.band) << '\n';
}

void write_comparison_csv(std::ostream& out, const TheoryComparison& c, std::optional<std::uint64_t> config_hash) {
    hash_line(out, config_hash);
    out << "theory,prior,likelihood,posterior\n";
    for (const auto& t : c.theories)
        out << t.tag << ',' << detail::format_double(t.prior) << ',' << detail::format_double(t.likelihood) << ','
            << detail::format_double(t.posterior) << '\n';
}

void write_agreement_csv(std::ostream& out, const AgreementReport& r, std::optional<std::uint64_t> config_hash) {
    hash_line(out, config_hash);
    out << "id,m_sqm,t_sqm,m_scbm,std_error,t_scbm,band,within\n";
    for (const auto& row : r.rows)
        out << row.id << ',' << detail::format_double(row.m_sqm) << ',' << detail::format_double(row.t_sqm) << ','
            << detail::format_double(row.m_scbm) << ',' << detail::format_double(row.std_error) << ','
            << detail::format_double(row.t_scbm) << ',' << detail::format_double(row.band) << ','
            << (row.within ? 1 : 0) << '\n';
}

}  // namespace bohm::inference
