#include <cmath>
#include <random>
#include <sstream>

#include "bohm/configspace/recipes.hpp"
#include "bohm/inference/inference.hpp"
#include "doctest.h"

using namespace bohm::configspace;
using namespace bohm::inference;
using bohm::perception::FamilySpec;
using bohm::perception::Region;
namespace pilotwave = bohm::pilotwave;
namespace ens = bohm::ensemble;
namespace perception = bohm::perception;

namespace {

// Direct reading of the definition: for each p, add up w'm' over every p'
// with m' <= m(p), then divide by the total.
std::vector<double> brute_typicality(const std::vector<double>& w, const std::vector<double>& m) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) total += w[j] * m[j];
    std::vector<double> t(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0.0) continue;
        double below = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m[j] <= m[i]) below += w[j] * m[j];
        t[i] = below / total;
    }
    return t;
}

StateRecipe mix01() {
    SuperpositionRecipe s;
    s.terms.push_back({cplx(1.0 / std::sqrt(2.0)), {EigenstateRecipe{HarmonicPotential{1.0}, {0, 0}}}});
    s.terms.push_back({cplx(1.0 / std::sqrt(2.0)), {EigenstateRecipe{HarmonicPotential{1.0}, {1, 0}}}});
    return {s};
}

struct Lab {
    std::shared_ptr<WavefunctionHistory> history;
    pilotwave::NodePolicy policy;
    std::shared_ptr<pilotwave::PilotWave> pilot;

    explicit Lab(double t_end) {
        const auto psi = make_state(Grid::line(-16.0, 16.0, 512), mix01());
        policy = pilotwave::NodePolicy::defaults(psi, t_end);
        history = std::make_shared<WavefunctionHistory>(psi, HarmonicPotential{1.0}, EvolutionConfig{1e-3, {}}, t_end, 5e-3);
        pilot = std::make_shared<pilotwave::PilotWave>(history, policy.node_epsilon);
    }

    ens::Ensemble ensemble(std::size_t n, std::uint64_t seed, double t1) const {
        return ens::evolve_ensemble(ens::sample_initial({ens::QuantumDensity{}}, *history->at(0.0), n, seed), 0.0, t1,
                                    *pilot, policy, {0.01, pilotwave::uniform_times(0.0, t1, 0.25)});
    }

    perception::PerceptionSet cells(double t, std::size_t count) const {
        FamilySpec spec;
        spec.times = {t};
        spec.edges[0] = perception::uniform_edges(Grid::line(-4.0, 4.0, 16).axis(0), count);
        spec.edges[0].front() = -16.0;
        spec.edges[0].back() = 16.0;
        return perception::build_perception_family(history->grid(), spec);
    }
};

}  // namespace

TEST_CASE("typicality_values: hand-evaluated examples") {
    const auto t = typicality_values({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0});
    CHECK(t[0] == 1.0 / 6.0);
    CHECK(t[1] == 3.0 / 6.0);
    CHECK(t[2] == 1.0);
    CHECK(t == brute_typicality({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}));

    for (double v : typicality_values({1.0, 2.0, 0.5, 3.0}, {0.2, 0.2, 0.2, 0.2})) CHECK(v == 1.0);

    const auto sbm = typicality_values({1.0, 1.0, 1.0, 1.0}, {0.0, 1.0, 0.0, 0.0});
    CHECK(sbm == std::vector<double>{0.0, 1.0, 0.0, 0.0});

    CHECK_THROWS_AS(typicality_values({1.0, 1.0}, {0.0, 0.0}), ZeroMeasureError);
    CHECK_THROWS_AS(typicality_values({1.0}, {0.0, 0.5}), bohm::InvalidArgument);
}

TEST_CASE("invariant: typicality equals brute-force enumeration for small sets") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<double> w(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Dyadic values: every partial sum is exact, so any order agrees.
            m[i] = static_cast<double>(rng() % 9) / 1024.0;
            w[i] = static_cast<double>(1 + rng() % 4);
        }
        if (std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; })) m[0] = 1.0 / 1024.0;
        CHECK(typicality_values(w, m) == brute_typicality(w, m));
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        std::vector<double> w(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = u(rng);
            w[i] = 0.1 + u(rng);
        }
        const auto a = typicality_values(w, m);
        const auto b = brute_typicality(w, m);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-15);
    }
}

TEST_CASE("invariant: monotone, maximal at the top, scale free") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        std::vector<double> w(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = rng() % 5 == 0 ? 0.25 : u(rng);  // planted ties
            w[i] = 0.1 + u(rng);
        }
        const auto t = typicality_values(w, m);
        const double top = *std::max_element(m.begin(), m.end());
        for (std::size_t i = 0; i < n; ++i) {
            CHECK((t[i] > 0.0 && t[i] <= 1.0));
            if (m[i] == top) CHECK(t[i] == 1.0);
            for (std::size_t j = 0; j < n; ++j)
                if (m[i] <= m[j]) CHECK(t[i] <= t[j]);
        }
        auto scaled = w;
        for (auto& x : scaled) x *= 37.5;
        const auto ts = typicality_values(scaled, m);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ts[i] - t[i]) < 1e-12);
    }
}

TEST_CASE("posterior_weights") {
    const auto p = posterior_weights({0.5, 0.5}, {0.1, 0.9});
    CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);

    const auto z = posterior_weights({0.2, 0.3, 0.5}, {0.0, 0.4, 0.7});
    CHECK(z[0] == 0.0);
    CHECK(std::abs(z[0] + z[1] + z[2] - 1.0) < 1e-12);
    const auto zs = posterior_weights({2.0, 3.0, 5.0}, {0.0, 0.4, 0.7});
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(zs[i] - z[i]) < 1e-12);

    CHECK_THROWS_AS(posterior_weights({1.0, 1.0}, {0.0, 0.0}), bohm::Error);
    CHECK_THROWS_AS(posterior_weights({0.0, 1.0}, {0.5, 0.5}), bohm::InvalidArgument);
}

TEST_CASE("typicality: report over a perception set") {
    Lab lab(1.0);
    const auto fam = lab.cells(1.0, 8);
    const auto rep = typicality(fam, perception::TheoryModel::sqm(lab.history));
    CHECK(rep.theory == "SQM");
    CHECK(rep.total_measure == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.entries.size() == 8);
    double top = 0.0;
    for (const auto& e : rep.entries) top = std::max(top, e.typicality);
    CHECK(top == 1.0);
    CHECK(rep.to_json()["perceptions"].size() == 8);

    const auto single = lab.cells(0.5, 1);
    CHECK(typicality(single, perception::TheoryModel::sqm(lab.history)).entries[0].typicality == 1.0);

    perception::PerceptionSet far;
    far.add({"far", 0.5, Region::intervals({{10.0, 11.0}}), 1.0});
    const pilotwave::Trajectory still{1, {0.0, 1.0}, {{0.0, 0.0}, {0.0, 0.0}}};
    CHECK_THROWS_AS(typicality(far, perception::TheoryModel::sbm(lab.history, still)), ZeroMeasureError);
}

TEST_CASE("compare_theories: SQM against a single-trajectory theory") {
    Lab lab(1.0);
    const auto e = lab.ensemble(5, 21, 1.0);
    const auto fam = lab.cells(1.0, 8);
    const auto& traj = e.trajectories[0];
    std::string observed;
    for (const auto& p : fam.perceptions())
        if (p.region.contains(traj.position_at(1.0))) observed = p.id;
    REQUIRE_FALSE(observed.empty());

    const auto sqm = perception::TheoryModel::sqm(lab.history);
    const auto sbm = perception::TheoryModel::sbm(lab.history, traj);
    const auto cmp = compare_theories(observed, fam, {{sqm, 0.5}, {sbm, 0.5}});
    REQUIRE(cmp.theories.size() == 2);
    CHECK(cmp.theories[0].posterior > 0.0);
    CHECK(cmp.theories[1].posterior > 0.0);
    CHECK(cmp.theories[1].likelihood == 1.0);
    CHECK(std::abs(cmp.theories[0].posterior + cmp.theories[1].posterior - 1.0) < 1e-12);

    std::string other = fam.at(0).id == observed ? fam.at(1).id : fam.at(0).id;
    const auto miss = compare_theories(other, fam, {{sqm, 0.5}, {sbm, 0.5}});
    CHECK(miss.theories[1].likelihood == 0.0);
    CHECK(miss.theories[1].posterior == 0.0);
    CHECK(miss.theories[0].posterior == 1.0);

    CHECK_THROWS_AS(compare_theories("nope", fam, {{sqm, 1.0}}), bohm::InvalidArgument);
    perception::PerceptionSet far;
    far.add({"far", 0.5, Region::intervals({{10.0, 11.0}}), 1.0});
    CHECK_THROWS_AS(compare_theories("far", far, {{sbm, 1.0}}), bohm::Error);

    std::stringstream csv;
    write_comparison_csv(csv, miss);
    CHECK(csv.str().rfind("theory,prior,likelihood,posterior\nSQM,0.5,", 0) == 0);
}

TEST_CASE("typicality_agreement_experiment") {
    Lab lab(1.0);
    const auto fam = lab.cells(1.0, 16);
    std::size_t within = 0, rows = 0;
    bool divergence = false;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto rep = typicality_agreement_experiment(fam, lab.history, lab.ensemble(2000, 40 + seed, 1.0), 3);
        for (const auto& r : rep.rows) {
            within += r.within;
            ++rows;
            CHECK(r.band > 0.0);
        }
        divergence = divergence || rep.sbm_divergence();
        CHECK(rep.sbm.size() == 3);
        for (const auto& s : rep.sbm)
            for (std::size_t i = 0; i < rep.rows.size(); ++i)
                if (s.typicality[i] == 0.0) CHECK(rep.rows[i].m_sqm >= 0.0);
    }
    CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(rows));
    CHECK(divergence);

    const auto one = typicality_agreement_experiment(lab.cells(1.0, 1), lab.history, lab.ensemble(50, 1, 1.0), 1);
    CHECK(one.rows[0].t_sqm == 1.0);
    CHECK(one.rows[0].t_scbm == 1.0);

    // A single trajectory misses all but one cell; SQM still weighs the others.
    const auto e = lab.ensemble(1, 5, 1.0);
    const auto sbm = perception::TheoryModel::sbm(lab.history, e.trajectories[0]);
    const auto sqm = perception::TheoryModel::sqm(lab.history);
    std::size_t missed = 0;
    for (const auto& p : fam.perceptions()) {
        if (perception::measure_density(p, sbm).m == 0.0 && perception::measure_density(p, sqm).m > 0.0) ++missed;
    }
    CHECK(missed == 15);

    std::stringstream csv;
    write_agreement_csv(csv, one, 3);
    CHECK(csv.str().find("id,m_sqm,t_sqm,m_scbm,std_error,t_scbm,band,within\n") != std::string::npos);
    CHECK(one.to_json()["N"] == 50);
}
