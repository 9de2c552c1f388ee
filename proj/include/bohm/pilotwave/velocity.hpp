#pragma once

#include <cstdint>
#include <vector>

#include "bohm/configspace/wavefunction.hpp"

namespace bohm::pilotwave {

using configspace::Grid;
using configspace::Units;
using configspace::Wavefunction;

// How close an interpolation stencil comes to a wavefunction node.
enum class NodeProximity { clear, near_node, at_node };

// Bohmian velocity v = (hbar/m) Im(grad psi / psi) on the grid. Points with
// |psi|^2 below node_epsilon carry no value and are flagged instead.
struct VelocityField {
    Grid grid;
    double time = 0.0;
    double node_epsilon = 0.0;
    std::vector<std::vector<double>> components;  // one per axis
    std::vector<std::uint8_t> flags;              // 1 where flagged

    struct Sample {
        Point v{0.0, 0.0};
        NodeProximity proximity = NodeProximity::clear;
    };
    // Multilinear interpolation with periodic wrap. Flagged stencil corners
    // are dropped and the remaining weights renormalized.
    Sample interpolate(const Point& x) const;
};

// Gradient taken spectrally. node_epsilon <= 0 selects 1e-12 of the peak
// density of psi.
VelocityField velocity_field(const Wavefunction& psi, const Units& units = {}, double node_epsilon = 0.0);

double default_node_epsilon(const Wavefunction& psi);

}  // namespace bohm::pilotwave
