#pragma once

#include <variant>
#include <vector>

#include "bohm/configspace/potential.hpp"
#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace {

// Minimum-uncertainty packet. `width` is the standard deviation of |psi|^2
// along each axis; `momentum` is the wavenumber of the carrier e^{ikx}.
struct GaussianRecipe {
    Point center{0.0, 0.0};
    double width = 1.0;
    Point momentum{0.0, 0.0};
};

// Closed-form eigenstate of a harmonic or box potential; one quantum number
// per axis (box numbers start at 1, harmonic at 0).
struct EigenstateRecipe {
    Potential potential = HarmonicPotential{};
    std::array<int, 2> n{0, 0};
};

struct SuperpositionTerm;

struct SuperpositionRecipe {
    std::vector<SuperpositionTerm> terms;
};

struct StateRecipe {
    std::variant<GaussianRecipe, EigenstateRecipe, SuperpositionRecipe> kind;
};

struct SuperpositionTerm {
    cplx coefficient{1.0, 0.0};
    StateRecipe recipe;
};

// Builds a normalized wavefunction at t = 0. Throws InvalidArgument when a
// packet is narrower than two cells, an eigenstate does not fit or is not
// resolved by the grid, or an eigenstate is requested for a potential with
// no closed form.
Wavefunction make_state(const Grid& grid, const StateRecipe& recipe, const Units& units = {});

// Normalized 1D oscillator eigenfunction, via the stable Hermite-function
// recurrence.
double harmonic_eigenfunction(int n, double x, double mass, double omega, double hbar);

}  // namespace bohm::configspace
