#include "bohm/configspace/potential.hpp"

#include <cmath>

#include "bohm/detail/overloaded.hpp"
#include "bohm/error.hpp"

namespace bohm::configspace {

using detail::overloaded;

std::string potential_name(const Potential& v) {
    return std::visit(overloaded{[](const FreePotential&) { return std::string("free"); },
                                 [](const HarmonicPotential&) { return std::string("harmonic"); },
                                 [](const BoxPotential&) { return std::string("box"); },
                                 [](const DoubleWellPotential&) { return std::string("double_well"); },
                                 [](const CustomPotential&) { return std::string("custom"); }},
                      v);
}

std::vector<double> sample_potential(const Potential& v, const Grid& grid, const Units& units) {
    std::vector<double> out(grid.size(), 0.0);
    if (const auto* custom = std::get_if<CustomPotential>(&v)) {
        if (custom->values.size() != grid.size())
            throw InvalidArgument("custom potential has " + std::to_string(custom->values.size()) +
                                  " values, grid has " + std::to_string(grid.size()));
        out = custom->values;
    } else {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point p = grid.point(i);
            double sum = 0.0;
            for (std::size_t a = 0; a < grid.dims(); ++a) {
                const double x = p[a];
                sum += std::visit(
                    overloaded{[](const FreePotential&) { return 0.0; },
                               [&](const HarmonicPotential& h) {
                                   return 0.5 * units.mass[a] * h.omega * h.omega * x * x;
                               },
                               [&](const BoxPotential& b) {
                                   return (x >= b.left && x < b.right) ? 0.0 : b.barrier;
                               },
                               [&](const DoubleWellPotential& d) {
                                   const double s2 = 0.25 * d.separation * d.separation;
                                   const double q = (x * x - s2) / s2;
                                   return d.barrier * q * q;
                               },
                               [](const CustomPotential&) { return 0.0; }},
                    v);
            }
            out[i] = sum;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!std::isfinite(out[i]))
            throw InvalidArgument("potential is not finite at grid point " + std::to_string(i));
    return out;
}

}  // namespace bohm::configspace
