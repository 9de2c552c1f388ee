#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace::fft {

// In-place complex transforms over a row-major shape of one or two extents.
// Unnormalized in both directions: backward(forward(x)) == size * x.
// Plans are created once per shape and shared; execution is safe from
// concurrent threads.
void forward(std::span<cplx> data, const std::vector<std::size_t>& shape);
void backward(std::span<cplx> data, const std::vector<std::size_t>& shape);

std::vector<std::size_t> shape_of(const Grid& grid);

}  // namespace bohm::configspace::fft
