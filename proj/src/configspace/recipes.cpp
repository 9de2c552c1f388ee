#include "bohm/configspace/recipes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bohm/detail/overloaded.hpp"
#include "bohm/error.hpp"

namespace bohm::configspace {

using detail::overloaded;

double harmonic_eigenfunction(int n, double x, double mass, double omega, double hbar) {
    const double scale = std::sqrt(mass * omega / hbar);
    const double xi = scale * x;
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return std::sqrt(scale) * cur;
}

namespace {

std::vector<cplx> gaussian(const Grid& grid, const GaussianRecipe& g) {
    for (std::size_t a = 0; a < grid.dims(); ++a) {
        const Axis& ax = grid.axis(a);
        if (!(g.width >= 2.0 * ax.spacing()))
            throw InvalidArgument("gaussian width " + std::to_string(g.width) + " is below two grid cells (" +
                                  std::to_string(2.0 * ax.spacing()) + ") on axis " + std::to_string(a));
        const double nyquist = std::numbers::pi / ax.spacing();
        const double k_extent = std::abs(g.momentum[a]) + 8.0 / (2.0 * g.width);
        if (k_extent > nyquist)
            throw InvalidArgument("gaussian momentum content exceeds grid resolution on axis " + std::to_string(a));
        if (!ax.contains(g.center[a]))
            throw InvalidArgument("gaussian center outside grid on axis " + std::to_string(a));
    }
    std::vector<cplx> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point p = grid.point(i);
        double expo = 0.0, phase = 0.0;
        for (std::size_t a = 0; a < grid.dims(); ++a) {
            const double d = p[a] - g.center[a];
            expo -= d * d / (4.0 * g.width * g.width);
            phase += g.momentum[a] * d;
        }
        out[i] = std::polar(std::exp(expo), phase);
    }
    return out;
}

double box_eigenfunction(int n, double x, double left, double right) {
    if (x < left || x >= right) return 0.0;
    const double len = right - left;
    return std::sqrt(2.0 / len) * std::sin(n * std::numbers::pi * (x - left) / len);
}

std::vector<cplx> eigenstate(const Grid& grid, const EigenstateRecipe& e, const Units& units) {
    std::vector<std::vector<double>> factors(grid.dims());
    for (std::size_t a = 0; a < grid.dims(); ++a) {
        const Axis& ax = grid.axis(a);
        const int n = e.n[a];
        const std::string where = " on axis " + std::to_string(a);
        auto& f = factors[a];
        f.resize(ax.points);
        std::visit(
            overloaded{
                [&](const HarmonicPotential& h) {
                    if (n < 0) throw InvalidArgument("harmonic quantum number must be >= 0" + where);
                    const double ell = std::sqrt(units.hbar / (units.mass[a] * h.omega));
                    const double reach = (std::sqrt(2.0 * n + 1.0) + 6.0) * ell;
                    if (ax.min > -reach || ax.max < reach)
                        throw InvalidArgument("harmonic eigenstate n=" + std::to_string(n) +
                                              " does not fit inside the grid" + where);
                    if (std::numbers::pi / ax.spacing() < reach / (ell * ell))
                        throw InvalidArgument("harmonic eigenstate n=" + std::to_string(n) +
                                              " is not resolved by the grid spacing" + where);
                    for (std::size_t i = 0; i < ax.points; ++i)
                        f[i] = harmonic_eigenfunction(n, ax.coord(i), units.mass[a], h.omega, units.hbar);
                },
                [&](const BoxPotential& b) {
                    if (n < 1) throw InvalidArgument("box quantum number must be >= 1" + where);
                    if (b.left < ax.min || b.right > ax.max || !(b.right > b.left))
                        throw InvalidArgument("box walls must lie inside the grid" + where);
                    if ((b.right - b.left) / n < 8.0 * ax.spacing())
                        throw InvalidArgument("box eigenstate n=" + std::to_string(n) +
                                              " is not resolved by the grid spacing" + where);
                    for (std::size_t i = 0; i < ax.points; ++i)
                        f[i] = box_eigenfunction(n, ax.coord(i), b.left, b.right);
                },
                [&](const auto& other) {
                    throw InvalidArgument("no closed-form eigenstates for potential '" +
                                          potential_name(Potential{other}) + "'");
                }},
            e.potential);
    }
    std::vector<cplx> out(grid.size());
    if (grid.dims() == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = factors[0][i];
    } else {
        const std::size_t n1 = grid.axis(1).points;
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = factors[0][i / n1] * factors[1][i % n1];
    }
    return out;
}

std::vector<cplx> build(const Grid& grid, const StateRecipe& recipe, const Units& units) {
    return std::visit(overloaded{[&](const GaussianRecipe& g) { return gaussian(grid, g); },
                                 [&](const EigenstateRecipe& e) { return eigenstate(grid, e, units); },
                                 [&](const SuperpositionRecipe& s) {
                                     if (s.terms.empty()) throw InvalidArgument("empty superposition");
                                     std::vector<cplx> sum(grid.size());
                                     for (const auto& term : s.terms) {
                                         Wavefunction part{grid, build(grid, term.recipe, units), 0.0};
                                         part.normalize();
                                         for (std::size_t i = 0; i < sum.size(); ++i)
                                             sum[i] += term.coefficient * part.amplitudes[i];
                                     }
                                     return sum;
                                 }},
                      recipe.kind);
}

}  // namespace

Wavefunction make_state(const Grid& grid, const StateRecipe& recipe, const Units& units) {
    Wavefunction psi{grid, build(grid, recipe, units), 0.0};
    psi.normalize();
    return psi;
}

}  // namespace bohm::configspace
