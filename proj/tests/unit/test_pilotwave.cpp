#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bohm/configspace/recipes.hpp"
#include "bohm/pilotwave/trajectory.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bohm::configspace;
using namespace bohm::pilotwave;
using bohm::Point;

namespace {

Grid line512() { return Grid::line(-16.0, 16.0, 512); }
StateRecipe ground() { return {EigenstateRecipe{HarmonicPotential{1.0}, {0, 0}}}; }
StateRecipe packet(double c, double w, double k) { return {GaussianRecipe{{c, 0.0}, w, {k, 0.0}}}; }

StateRecipe mix01(cplx c1) {
    SuperpositionRecipe s;
    s.terms.push_back({cplx(1.0 / std::sqrt(2.0)), ground()});
    s.terms.push_back({c1 / std::sqrt(2.0), {EigenstateRecipe{HarmonicPotential{1.0}, {1, 0}}}});
    return {s};
}

struct Setup {
    std::shared_ptr<WavefunctionHistory> history;
    NodePolicy policy;
    std::shared_ptr<PilotWave> pilot;
};

Setup setup(const StateRecipe& recipe, const Potential& v, double t_end, double dt = 1e-3, double snap = 5e-3) {
    auto psi = make_state(line512(), recipe);
    Setup s;
    s.policy = NodePolicy::defaults(psi, t_end);
    s.history = std::make_shared<WavefunctionHistory>(psi, v, EvolutionConfig{dt, {}}, t_end, snap);
    s.pilot = std::make_shared<PilotWave>(s.history, s.policy.node_epsilon);
    return s;
}

// Central difference of the phase gradient of a closed-form state.
template <class F>
double fd_velocity(F psi, double x, double h = 1e-5) {
    return ((psi(x + h) - psi(x - h)) / (2.0 * h) / psi(x)).imag();
}

}  // namespace

TEST_CASE("velocity_field: plane-wave-modulated gaussian moves at hbar k / m") {
    const auto psi = make_state(line512(), packet(0.0, 1.0, 1.7));
    const auto field = velocity_field(psi);
    const auto rho = density(psi);
    int checked = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] > 10.0 * field.node_epsilon) {
            CHECK(field.components[0][i] == doctest::Approx(1.7).epsilon(1e-9));
            ++checked;
        } else {
            CHECK(field.flags[i] == (rho[i] < field.node_epsilon ? 1 : 0));
        }
    }
    CHECK(checked > 100);

    Units heavy;
    heavy.mass = {2.0, 1.0};
    heavy.hbar = 0.5;
    const auto scaled = velocity_field(psi, heavy);
    CHECK(scaled.components[0][256] == doctest::Approx(1.7 * 0.5 / 2.0).epsilon(1e-12));
}

TEST_CASE("velocity_field: real positive state has zero velocity") {
    const auto psi = make_state(line512(), ground());
    const auto field = velocity_field(psi);
    const auto rho = density(psi);
    const double peak = *std::max_element(rho.begin(), rho.end());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        // Bulk: exact zero up to rounding. Tails: limited by FFT rounding
        // relative to the peak amplitude.
        if (rho[i] > 1e-4 * peak) CHECK(std::abs(field.components[0][i]) < 1e-12);
        else if (field.flags[i] == 0) CHECK(std::abs(field.components[0][i]) < 1e-8);
        else CHECK(field.components[0][i] == 0.0);
    }
}

TEST_CASE("velocity_field: spectral gradient agrees with finite differences") {
    const double inv = 1.0 / std::sqrt(2.0);
    const auto closed = [&](double x) { return cplx(oracle::ho0(x) * inv, oracle::ho1(x) * inv); };
    const auto psi = make_state(line512(), mix01(cplx(0.0, 1.0)));
    const auto field = velocity_field(psi);
    const auto rho = density(psi);
    double worst = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] <= 10.0 * field.node_epsilon) continue;
        worst = std::max(worst, std::abs(field.components[0][i] - fd_velocity(closed, psi.grid.point(i)[0])));
    }
    CHECK(worst < 1e-6);

    // Same check after evolution, against the analytically evolved state.
    auto s = setup(mix01(1.0), HarmonicPotential{1.0}, 1.0, 1e-4, 1e-3);
    const double t = 0.7;
    const auto evolved = [&](double x) {
        return (oracle::ho0(x) * std::polar(1.0, -0.5 * t) + oracle::ho1(x) * std::polar(1.0, -1.5 * t)) * inv;
    };
    const auto f = s.pilot->field_at(t);
    const auto rho_t = density(*s.history->at(t));
    worst = 0.0;
    for (std::size_t i = 0; i < rho_t.size(); ++i) {
        if (rho_t[i] <= 10.0 * f->node_epsilon) continue;
        worst = std::max(worst, std::abs(f->components[0][i] - fd_velocity(evolved, f->grid.point(i)[0])));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("invariant: velocity is gauge invariant") {
    auto psi = make_state(line512(), mix01(cplx(0.3, 0.8)));
    const auto a = velocity_field(psi);
    for (auto& z : psi.amplitudes) z *= std::polar(1.0, 1.234);
    const auto b = velocity_field(psi, {}, a.node_epsilon);
    const auto rho = density(psi);
    const double peak = *std::max_element(rho.begin(), rho.end());
    for (std::size_t i = 0; i < psi.grid.size(); ++i) {
        CHECK(a.flags[i] == b.flags[i]);
        if (std::norm(psi.amplitudes[i]) > 1e-4 * peak)
            CHECK(std::abs(a.components[0][i] - b.components[0][i]) < 1e-12);
    }
}

TEST_CASE("integrate_trajectory: stationary state gives static trajectories") {
    auto s = setup(ground(), HarmonicPotential{1.0}, 10.0, 1e-4, 5e-3);
    IntegrationOptions opt{0.01, uniform_times(0.0, 10.0, 0.1)};
    for (double x0 : {-2.0, -0.3, 0.0, 1.1, 2.5}) {
        const auto traj = integrate_trajectory({x0, 0.0}, 0.0, 10.0, *s.pilot, s.policy, opt);
        double worst = 0.0;
        for (const auto& p : traj.positions) worst = std::max(worst, std::abs(p[0] - x0));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("integrate_trajectory: free gaussian trajectories follow the spreading law") {
    auto s = setup(packet(0.0, 1.0, 0.0), FreePotential{}, 2.0);
    IntegrationOptions opt{0.01, uniform_times(0.0, 2.0, 0.1)};
    const auto centre = integrate_trajectory({0.0, 0.0}, 0.0, 2.0, *s.pilot, s.policy, opt);
    for (const auto& p : centre.positions) CHECK(std::abs(p[0]) < 1e-6);

    const auto traj = integrate_trajectory({1.0, 0.0}, 0.0, 2.0, *s.pilot, s.policy, opt);
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        CHECK(std::abs(traj.positions[k][0] - oracle::free_width(1.0, traj.times[k])) < 1e-3);
    CHECK(traj.times.back() == 2.0);
}

TEST_CASE("invariant: RK4 error falls ~16x when the step halves") {
    auto s = setup(packet(0.0, 1.0, 0.0), FreePotential{}, 2.0, 1e-3, 1e-3);
    auto end = [&](double h) {
        IntegrationOptions opt{h, {}};
        return integrate_trajectory({1.0, 0.0}, 0.0, 2.0, *s.pilot, s.policy, opt).positions.back()[0];
    };
    const double h = 0.2;
    const double ref = end(h / 8.0);
    const double ratio = std::abs(end(h) - ref) / std::abs(end(h / 2.0) - ref);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("invariant: 1D trajectories never cross") {
    auto s = setup(mix01(1.0), HarmonicPotential{1.0}, 4.0);
    IntegrationOptions opt{0.01, uniform_times(0.0, 4.0, 0.05)};
    std::vector<Trajectory> fan;
    for (double x0 = -2.0; x0 <= 2.0; x0 += 0.25)
        fan.push_back(integrate_trajectory({x0, 0.0}, 0.0, 4.0, *s.pilot, s.policy, opt));
    for (std::size_t j = 1; j < fan.size(); ++j)
        for (std::size_t k = 0; k < fan[j].times.size(); ++k)
            CHECK(fan[j - 1].positions[k][0] < fan[j].positions[k][0]);
}

TEST_CASE("integrate_trajectory: persistent node raises with its location") {
    auto s = setup(ground(), HarmonicPotential{1.0}, 1.0);
    IntegrationOptions opt{0.01, {}};
    try {
        integrate_trajectory({12.0, 0.0}, 0.0, 1.0, *s.pilot, s.policy, opt);
        FAIL("expected NodeUnderflowError");
    } catch (const NodeUnderflowError& e) {
        CHECK(e.time() == 0.0);
        CHECK(e.position()[0] == 12.0);
    }
}

TEST_CASE("integrate_trajectory: argument validation") {
    auto s = setup(ground(), HarmonicPotential{1.0}, 1.0);
    IntegrationOptions opt{0.01, {}};
    CHECK_THROWS_AS(integrate_trajectory({0.0, 0.0}, 1.0, 0.5, *s.pilot, s.policy, opt), bohm::InvalidArgument);
    CHECK_THROWS_AS(integrate_trajectory({40.0, 0.0}, 0.0, 1.0, *s.pilot, s.policy, opt), bohm::InvalidArgument);
    CHECK_THROWS_AS(integrate_trajectory({0.0, 0.0}, 0.0, 2.0, *s.pilot, s.policy, opt), bohm::OutOfRange);
    NodePolicy bad = s.policy;
    bad.substep_shrink = 1.5;
    CHECK_THROWS_AS(integrate_trajectory({0.0, 0.0}, 0.0, 1.0, *s.pilot, bad, opt), bohm::InvalidArgument);
}

TEST_CASE("path_density_integral") {
    auto s = setup(ground(), HarmonicPotential{1.0}, 10.0);
    IntegrationOptions opt{0.01, uniform_times(0.0, 10.0, 0.05)};
    const auto at0 = integrate_trajectory({0.0, 0.0}, 0.0, 10.0, *s.pilot, s.policy, opt);
    const auto at2 = integrate_trajectory({2.0, 0.0}, 0.0, 10.0, *s.pilot, s.policy, opt);
    const double i0 = path_density_integral(at0, *s.history);
    CHECK(std::abs(i0 - 10.0 / std::sqrt(std::numbers::pi)) < 1e-4);
    CHECK(i0 > path_density_integral(at2, *s.history));

    Trajectory single{1, {0.0}, {{0.0, 0.0}}};
    CHECK(path_density_integral(single, *s.history) == 0.0);
}

TEST_CASE("trajectory CSV round trip and interpolation") {
    Trajectory traj{1, {0.0, 0.5, 1.0}, {{0.0, 0.0}, {1.0, 0.0}, {3.0, 0.0}}};
    std::stringstream io;
    write_trajectory_csv(io, traj, 5);
    const auto back = read_trajectory_csv(io);
    CHECK(back.times == traj.times);
    CHECK(back.positions == traj.positions);
    CHECK(back.position_at(0.75)[0] == doctest::Approx(2.0));
    CHECK_THROWS_AS(back.position_at(1.5), bohm::OutOfRange);

    std::stringstream bad("t,x\n0,1\n0,2\n");
    CHECK_THROWS_AS(read_trajectory_csv(bad), bohm::InvalidArgument);
}

TEST_CASE("2D: trajectories in a moving packet travel with the group velocity") {
    const Grid g({{-12.0, 12.0, 64}, {-12.0, 12.0, 64}});
    auto psi = make_state(g, {GaussianRecipe{{0.0, 0.0}, 1.0, {0.5, -0.25}}});
    auto policy = NodePolicy::defaults(psi, 1.0);
    auto history = std::make_shared<WavefunctionHistory>(psi, FreePotential{}, EvolutionConfig{2e-3, {}}, 1.0, 1e-2);
    PilotWave pilot(history, policy.node_epsilon);
    const auto traj = integrate_trajectory({0.0, 0.0}, 0.0, 1.0, pilot, policy, {0.02, {}});
    CHECK(traj.dims == 2);
    CHECK(traj.positions.back()[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(traj.positions.back()[1] == doctest::Approx(-0.25).epsilon(1e-6));
}
