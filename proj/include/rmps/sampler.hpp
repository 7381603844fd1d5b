#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmps/filter.hpp"
#include "rmps/model.hpp"
#include "rmps/mps.hpp"

namespace rmps {

/// Parameters of one power-method run. The target energy is given either
/// directly or as a density u = E / N, never both.
struct SamplerConfig {
  SpinModel model;
  std::optional<double> energy;
  std::optional<double> energy_density;
  SigmaMode sigma_mode = SigmaMode::bound;
  /// Only read in SigmaMode::fixed.
  std::optional<double> sigma;
  Index chi = 16;
  int iterations = 100;
  double compress_tol = kDefaultCompressTol;
  int max_sweeps = kDefaultMaxSweeps;
  int record_every = 10;
  /// Iterations whose energies are histogrammed and fitted. Empty means
  /// {1, 10, 30, 100, iterations}, clipped to the run length.
  std::vector<int> checkpoints;
  std::uint64_t seed = 0;
  int samples = 1;
  /// Truncation errors cost one <psi|G^dag G|psi> contraction per record.
  bool track_truncation = true;

  /// Throws InvalidParameter naming the offending field.
  void validate() const;
  double target_energy() const;
  double target_density() const;
  double resolved_sigma() const;
  std::vector<int> resolved_checkpoints() const;
  /// Iterations at which a record is taken: 0, multiples of record_every,
  /// the checkpoints and the final iteration.
  std::vector<int> recorded_iterations() const;
};

struct IterationRecord {
  int k = 0;
  double energy = 0.0;
  /// <H^2> - <H>^2 with the compressed H^2 operator.
  double energy_variance = 0.0;
  /// Error of the compression at iteration k; NaN when not tracked or k = 0.
  double truncation_error = 0.0;
  /// log ||G psi_{k-1}|| for the normalized previous iterate; 0 at k = 0.
  double log_norm_decrement = 0.0;
};

struct IterationTrace {
  std::uint64_t sample_index = 0;
  std::vector<IterationRecord> records;
};

struct SampleOutcome {
  std::uint64_t sample_index = 0;
  /// Unit norm; the accumulated scale log ||G^k psi_0|| is in log_norm().
  MpsC state;
  IterationTrace trace;
  bool failed = false;
  std::string failure;
  int half_sweeps = 0;
};

/// Holds the operators for one configuration so that many samples can share
/// them. run() is const and safe to call concurrently.
class Sampler {
 public:
  explicit Sampler(SamplerConfig config);

  const SamplerConfig& config() const { return config_; }
  double energy() const { return energy_; }
  double sigma() const { return filter_.sigma; }
  const FilterOperator<Complex>& filter() const { return filter_; }

  /// Seeds a random MPS from derive_stream(seed, sample_index) and iterates
  /// psi <- G psi / ||G psi||. Numerical failures mark the outcome failed
  /// instead of throwing.
  SampleOutcome run(std::uint64_t sample_index) const;

 private:
  SamplerConfig config_;
  double energy_;
  FilterOperator<Complex> filter_;
  std::vector<int> recorded_;
};

SampleOutcome run_sample(const SamplerConfig& config, std::uint64_t sample_index);

struct ConvergenceSummary {
  /// Least-squares slope of log variance against log k over the tail
  /// (records with k >= max(10, k_last / 2) and positive variance). Absent
  /// with fewer than 2 points.
  std::optional<double> variance_exponent;
  int tail_points = 0;
  std::optional<double> final_energy_offset;
  std::optional<double> final_variance;
  /// Variance sigma^2 / (4k) implied by the weight exp[-2k((E_i - E)/sigma)^2].
  std::optional<double> model_variance;
  std::optional<double> measured_over_model;
  /// The alternative constant 4 sigma^2 / k, reported for comparison only.
  std::optional<double> alternative_variance;
};

ConvergenceSummary convergence_diagnostics(const IterationTrace& trace, const SamplerConfig& config);

/// Slope of log y against log x by least squares; absent with fewer than
/// two usable (positive) points.
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rmps
