#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmps/sampler.hpp"

namespace rmps {

/// Moment-matched normal fit.
struct GaussianFit {
  double mean = 0.0;
  /// Unbiased.
  double variance = 0.0;
  Index sample_count = 0;
  double standard_error_mean = 0.0;
  /// Kolmogorov-Smirnov distance to N(mean, variance); 0 for a degenerate fit.
  double ks_statistic = 0.0;
};

GaussianFit fit_gaussian(std::span<const double> samples);

/// Sample mean with its standard error, and the norm-weighted ratio
/// estimator sum_s w_s x_s / sum_s w_s with w_s = ||G^k psi_s||^2, which is
/// the unbiased counterpart of Tr(O G^2k) / Tr(G^2k). Standard errors are
/// absent for a single sample.
struct Estimate {
  double mean = 0.0;
  std::optional<double> standard_error;
  double weighted_mean = 0.0;
  std::optional<double> weighted_standard_error;
  Index sample_count = 0;
};

Estimate estimate(std::span<const double> values, std::span<const double> log_norms);

struct ObservableRequest {
  bool magnetization = false;
  std::vector<Index> correlations;
};

struct SampleSummary {
  std::uint64_t sample_index = 0;
  bool failed = false;
  std::string failure;
  IterationTrace trace;
  /// log ||G^k psi_0||.
  double log_norm = 0.0;
  int half_sweeps = 0;
  std::optional<double> magnetization;
  std::vector<double> correlations;
};

struct CheckpointFit {
  int k = 0;
  GaussianFit energy;
  /// Ensemble mean of the per-state energy variance.
  Estimate variance;
};

struct EnsembleResult {
  SamplerConfig config;
  double energy = 0.0;
  double sigma = 0.0;
  bool positivity_guaranteed = true;
  std::vector<std::string> warnings;
  /// In sample_index order, failed ones included.
  std::vector<SampleSummary> samples;
  std::vector<CheckpointFit> fits;
  std::optional<Estimate> magnetization;
  std::vector<std::pair<Index, Estimate>> correlations;
  Index failed = 0;
  double wall_seconds = 0.0;
};

/// Hardware concurrency, at least 1.
unsigned default_threads();

/// Runs config.samples independent samples on up to `threads` workers. The
/// result depends only on the config, never on the thread count. Throws
/// RunFailed if every sample fails.
EnsembleResult run_ensemble(const SamplerConfig& config, const ObservableRequest& request = {}, unsigned threads = 1);

/// Same, with the sample indices given explicitly (used to extend runs).
EnsembleResult run_ensemble(const SamplerConfig& config, const ObservableRequest& request, unsigned threads,
                            std::span<const std::uint64_t> sample_indices);

struct CurvePoint {
  double h = 0.0;
  Estimate m_z;
  EnsembleResult run;
};

/// One ensemble per field value at fixed energy density (E = u N). Grid
/// point g uses the seed derive_seed(seed, g). Sorted by h. Correlations at
/// the given distances are collected from the same runs.
std::vector<CurvePoint> magnetization_curve(const SamplerConfig& base, std::vector<double> fields, unsigned threads = 1,
                                            const std::function<void(const CurvePoint&)>& progress = {},
                                            const std::vector<Index>& correlations = {});

struct CorrelationPoint {
  Index j = 0;
  Estimate phi;
};

std::vector<CorrelationPoint> correlation_profile(const SamplerConfig& base, const std::vector<Index>& distances,
                                                  unsigned threads = 1, EnsembleResult* run = nullptr);

}  // namespace rmps
