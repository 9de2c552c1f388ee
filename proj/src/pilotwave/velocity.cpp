#include "bohm/pilotwave/velocity.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/configspace/fft.hpp"
#include "bohm/simd/kernels.hpp"

namespace bohm::pilotwave {

namespace fft = configspace::fft;
using configspace::Axis;
using configspace::cplx;

double default_node_epsilon(const Wavefunction& psi) {
    const auto rho = configspace::density(psi);
    return 1e-12 * *std::max_element(rho.begin(), rho.end());
}

VelocityField velocity_field(const Wavefunction& psi, const Units& units, double node_epsilon) {
    if (node_epsilon <= 0.0) node_epsilon = default_node_epsilon(psi);
    const Grid& grid = psi.grid;
    const auto shape = fft::shape_of(grid);
    const auto& k = simd::kernels();

    VelocityField out{grid, psi.time, node_epsilon, {}, std::vector<std::uint8_t>(grid.size())};
    std::vector<cplx> spec = psi.amplitudes;
    fft::forward(spec, shape);
    const double inv_n = 1.0 / static_cast<double>(grid.size());
    for (std::size_t a = 0; a < grid.dims(); ++a) {
        auto wave = grid.wavenumbers(a);
        for (auto& q : wave) q *= inv_n;
        std::vector<cplx> grad = spec;
        k.mul_ik(grad.data(), wave.data(), grad.size());
        fft::backward(grad, shape);
        std::vector<double> v(grid.size());
        k.phase_velocity(psi.amplitudes.data(), grad.data(), units.hbar / units.mass[a], node_epsilon, v.data(),
                         out.flags.data(), grid.size());
        out.components.push_back(std::move(v));
    }
    return out;
}

VelocityField::Sample VelocityField::interpolate(const Point& x) const {
    std::size_t idx[2][2] = {{0, 0}, {0, 0}};
    double frac[2] = {0.0, 0.0};
    const std::size_t dims = grid.dims();
    for (std::size_t a = 0; a < dims; ++a) {
        const Axis& ax = grid.axis(a);
        const double u = (ax.wrap(x[a]) - ax.min) / ax.spacing();
        const double base = std::floor(u);
        frac[a] = u - base;
        const auto i0 = static_cast<std::size_t>(base) % ax.points;
        idx[a][0] = i0;
        idx[a][1] = (i0 + 1) % ax.points;
    }
    const int corners = dims == 1 ? 2 : 4;
    std::size_t flat[4];
    double weight[4];
    for (int c = 0; c < corners; ++c) {
        const int c0 = c & 1, c1 = (c >> 1) & 1;
        flat[c] = dims == 1 ? idx[0][c0] : grid.index(idx[0][c0], idx[1][c1]);
        weight[c] = c0 ? frac[0] : 1.0 - frac[0];
        if (dims == 2) weight[c] *= c1 ? frac[1] : 1.0 - frac[1];
    }

    Sample s;
    int flagged = 0;
    for (int c = 0; c < corners; ++c) flagged += flags[flat[c]];
    if (flagged == 0) {
        for (std::size_t a = 0; a < dims; ++a) {
            double acc = 0.0;
            for (int c = 0; c < corners; ++c) acc += weight[c] * components[a][flat[c]];
            s.v[a] = acc;
        }
        return s;
    }
    if (flagged == corners) {
        s.proximity = NodeProximity::at_node;
        return s;
    }
    s.proximity = NodeProximity::near_node;
    double wsum = 0.0;
    int count = 0;
    for (int c = 0; c < corners; ++c)
        if (!flags[flat[c]]) {
            wsum += weight[c];
            ++count;
        }
    for (std::size_t a = 0; a < dims; ++a) {
        double acc = 0.0;
        for (int c = 0; c < corners; ++c) {
            if (flags[flat[c]]) continue;
            acc += (wsum > 0.0 ? weight[c] / wsum : 1.0 / count) * components[a][flat[c]];
        }
        s.v[a] = acc;
    }
    return s;
}

}  // namespace bohm::pilotwave
