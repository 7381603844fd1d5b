#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rmps/sampler.hpp"

namespace rmps {

/// Invalid or missing configuration value. The message names the field as
/// section.key.
class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Contents of an INI run file:
///
///   [model]    kind, N, J, h (Heisenberg) or g (transverse Ising)
///   [sampler]  chi, E or u, sigma, iterations, samples, compress_tol,
///              record_every, checkpoints, max_sweeps, track_truncation
///   [run]      seed, output_dir, threads
///
/// sigma is "auto" (the rigorous bound), a mode name (bound, paper,
/// paper-coeff) or a positive number.
struct RunConfig {
  SamplerConfig sampler;
  std::filesystem::path output_dir = "out";
  std::optional<unsigned> threads;
};

RunConfig parse_run_config(const std::string& ini_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Parses "start:stop:step" (inclusive of stop within half a step) or a comma
/// list. Throws ConfigError on an empty or malformed grid.
std::vector<double> parse_grid(const std::string& spec);

/// Parses "a..b", "a:b" or a comma list of positive integers.
std::vector<Index> parse_index_list(const std::string& spec);

}  // namespace rmps
