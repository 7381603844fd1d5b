#include "rmps/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "rmps/observables.hpp"
#include "rmps/rng.hpp"

namespace rmps {
namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

SampleSummary summarize(const Sampler& sampler, const ObservableRequest& request, std::uint64_t index) {
  auto outcome = sampler.run(index);
  SampleSummary s;
  s.sample_index = index;
  s.failed = outcome.failed;
  s.failure = std::move(outcome.failure);
  s.trace = std::move(outcome.trace);
  s.half_sweeps = outcome.half_sweeps;
  if (s.failed) return s;
  s.log_norm = outcome.state.log_norm();
  try {
    if (request.magnetization) {
      const auto mz = local_expectations(outcome.state, Pauli::z);
      s.magnetization = std::accumulate(mz.begin(), mz.end(), 0.0) / static_cast<double>(mz.size());
    }
    for (Index j : request.correlations) s.correlations.push_back(zz_correlation(outcome.state, j));
  } catch (const NumericalFailure& e) {
    s.failed = true;
    s.failure = e.what();
  }
  return s;
}

}  // namespace

GaussianFit fit_gaussian(std::span<const double> samples) {
  if (samples.size() < 2) throw InsufficientData("fit_gaussian: need at least 2 samples");
  GaussianFit fit;
  const double n = static_cast<double>(samples.size());
  fit.sample_count = static_cast<Index>(samples.size());
  fit.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - fit.mean) * (x - fit.mean);
  fit.variance = ss / (n - 1.0);
  fit.standard_error_mean = std::sqrt(fit.variance / n);
  if (fit.variance > 0.0) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = std::sqrt(fit.variance);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const double f = normal_cdf((sorted[i] - fit.mean) / sd);
      fit.ks_statistic = std::max({fit.ks_statistic, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
  }
  return fit;
}

Estimate estimate(std::span<const double> values, std::span<const double> log_norms) {
  if (values.empty()) throw InsufficientData("estimate: no samples");
  if (values.size() != log_norms.size()) throw InvalidParameter("estimate: size mismatch");
  Estimate e;
  const std::size_t n = values.size();
  e.sample_count = static_cast<Index>(n);
  e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);

  const double top = *std::max_element(log_norms.begin(), log_norms.end());
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(2.0 * (log_norms[i] - top));
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) e.weighted_mean += w[i] * values[i] / wsum;

  if (n >= 2) {
    const double dn = static_cast<double>(n);
    double ss = 0.0, wss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ss += (values[i] - e.mean) * (values[i] - e.mean);
      const double r = w[i] * (values[i] - e.weighted_mean);
      wss += r * r;
    }
    e.standard_error = std::sqrt(ss / (dn - 1.0) / dn);
    // Delta-method variance of a ratio estimator.
    e.weighted_standard_error = std::sqrt(dn / (dn - 1.0) * wss) / wsum;
  }
  return e;
}

unsigned default_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

EnsembleResult run_ensemble(const SamplerConfig& config, const ObservableRequest& request, unsigned threads) {
  std::vector<std::uint64_t> indices(static_cast<std::size_t>(config.samples));
  std::iota(indices.begin(), indices.end(), std::uint64_t(0));
  return run_ensemble(config, request, threads, indices);
}

EnsembleResult run_ensemble(const SamplerConfig& config, const ObservableRequest& request, unsigned threads,
                            std::span<const std::uint64_t> sample_indices) {
  const auto start = std::chrono::steady_clock::now();
  const Sampler sampler(config);
  EnsembleResult result;
  result.config = config;
  result.energy = sampler.energy();
  result.sigma = sampler.sigma();
  result.positivity_guaranteed = sampler.filter().positivity_guaranteed;
  result.warnings = sampler.filter().warnings;
  result.samples.resize(sample_indices.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < sample_indices.size(); i = next++) {
      try {
        result.samples[i] = summarize(sampler, request, sample_indices[i]);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(sample_indices.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  // Deterministic fold in sample order.
  std::vector<const SampleSummary*> good;
  for (const auto& s : result.samples) {
    if (s.failed)
      ++result.failed;
    else
      good.push_back(&s);
  }
  if (good.empty()) throw RunFailed("run_ensemble: every sample failed");

  std::vector<double> log_norms;
  for (const auto* s : good) log_norms.push_back(s->log_norm);
  for (int k : config.resolved_checkpoints()) {
    std::vector<double> energies, variances, scales;
    for (const auto* s : good)
      for (const auto& r : s->trace.records)
        if (r.k == k) {
          energies.push_back(r.energy);
          variances.push_back(r.energy_variance);
          scales.push_back(0.0);
        }
    if (energies.empty()) continue;
    CheckpointFit fit;
    fit.k = k;
    if (energies.size() >= 2) {
      fit.energy = fit_gaussian(energies);
    } else {
      fit.energy.mean = energies.front();
      fit.energy.sample_count = 1;
    }
    fit.variance = estimate(variances, scales);
    result.fits.push_back(fit);
  }
  if (request.magnetization) {
    std::vector<double> values;
    for (const auto* s : good) values.push_back(*s->magnetization);
    result.magnetization = estimate(values, log_norms);
  }
  for (std::size_t c = 0; c < request.correlations.size(); ++c) {
    std::vector<double> values;
    for (const auto* s : good) values.push_back(s->correlations[c]);
    result.correlations.emplace_back(request.correlations[c], estimate(values, log_norms));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<CurvePoint> magnetization_curve(const SamplerConfig& base, std::vector<double> fields, unsigned threads,
                                            const std::function<void(const CurvePoint&)>& progress,
                                            const std::vector<Index>& correlations) {
  if (fields.empty()) throw InvalidParameter("magnetization_curve: empty field grid");
  std::sort(fields.begin(), fields.end());
  // The energy density is what stays fixed across the grid.
  const double u = base.target_density();
  std::vector<CurvePoint> curve;
  for (std::size_t g = 0; g < fields.size(); ++g) {
    SamplerConfig config = base;
    config.model.field = fields[g];
    config.energy.reset();
    config.energy_density = u;
    config.seed = derive_seed(base.seed, g);
    CurvePoint point;
    point.h = fields[g];
    point.run = run_ensemble(config, {.magnetization = true, .correlations = correlations}, threads);
    point.m_z = *point.run.magnetization;
    if (progress) progress(point);
    curve.push_back(std::move(point));
  }
  return curve;
}

std::vector<CorrelationPoint> correlation_profile(const SamplerConfig& base, const std::vector<Index>& distances,
                                                  unsigned threads, EnsembleResult* run) {
  if (distances.empty()) throw InvalidParameter("correlation_profile: no distances requested");
  for (Index j : distances)
    if (j < 1 || j >= base.model.sites) throw InvalidParameter("correlation_profile: distance out of range");
  auto result = run_ensemble(base, {.magnetization = false, .correlations = distances}, threads);
  std::vector<CorrelationPoint> out;
  for (const auto& [j, est] : result.correlations) out.push_back({j, est});
  if (run) *run = std::move(result);
  return out;
}

}  // namespace rmps
