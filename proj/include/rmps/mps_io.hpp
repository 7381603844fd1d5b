#pragma once

#include <filesystem>
#include <iosfwd>

#include "rmps/mps.hpp"

namespace rmps {

// Checkpoint layout, all integers uint64 and all reals float64, little-endian:
//   magic "RMPSDUMP", N, d, N + 1 bond dimensions, log_norm, canonical tag
//   (0 none, 1 left, 2 right), then for every site the tensor A[s][a][b] in
//   row-major order as (re, im) pairs.

void write_mps(std::ostream& out, const MpsC& state);
MpsC read_mps(std::istream& in);

void save_mps(const std::filesystem::path& path, const MpsC& state);
MpsC load_mps(const std::filesystem::path& path);

}  // namespace rmps
