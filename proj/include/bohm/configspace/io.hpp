#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "bohm/configspace/wavefunction.hpp"

namespace bohm::configspace {

// CSV snapshot: optional `# config_hash=<hex>` and `# t=<time>` comment
// lines, then columns x[,y],re,im,density, one row per grid point.
void write_csv(std::ostream& out, const Wavefunction& psi, std::optional<std::uint64_t> config_hash = {});
// Reads a snapshot written by write_csv back onto `grid`.
Wavefunction read_csv(std::istream& in, const Grid& grid);

// Binary dump, all fields little-endian:
//   char[8]  magic "BOHMWF01"
//   u32      dims, u32 reserved (0)
//   per axis: f64 min, f64 max, u64 points
//   f64      time
//   u64      config hash (0 when absent)
//   payload: interleaved re, im as f64, flattened row-major.
void write_binary(std::ostream& out, const Wavefunction& psi, std::uint64_t config_hash = 0);
struct BinarySnapshot {
    Wavefunction psi;
    std::uint64_t config_hash = 0;
};
BinarySnapshot read_binary(std::istream& in);

}  // namespace bohm::configspace
