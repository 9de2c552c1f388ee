#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace {

struct FreePotential {};

// V = 1/2 m omega^2 x^2 on every axis.
struct HarmonicPotential {
    double omega = 1.0;
};

// Zero inside [left, right) on every axis, `barrier` outside.
struct BoxPotential {
    double left = -1.0;
    double right = 1.0;
    double barrier = 1.0e4;
};

// Quartic double well along every axis: minima at +-separation/2, height
// `barrier` at the origin.
struct DoubleWellPotential {
    double barrier = 1.0;
    double separation = 2.0;
};

// Tabulated values, one per grid point in flattened order.
struct CustomPotential {
    std::vector<double> values;
};

using Potential =
    std::variant<FreePotential, HarmonicPotential, BoxPotential, DoubleWellPotential, CustomPotential>;

std::string potential_name(const Potential& v);

// Samples V on the grid. Throws InvalidArgument for a non-finite value or a
// custom table of the wrong size.
std::vector<double> sample_potential(const Potential& v, const Grid& grid, const Units& units = {});

}  // namespace bohm::configspace
