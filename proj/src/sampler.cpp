#include "rmps/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rmps/compress.hpp"
#include "rmps/contraction.hpp"
#include "rmps/rng.hpp"

namespace rmps {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidParameter(message);
}

}  // namespace

void SamplerConfig::validate() const {
  model.validate();
  require(energy.has_value() != energy_density.has_value(), "sampler: exactly one of energy and energy_density must be set");
  require(std::isfinite(target_energy()), "sampler.energy: must be finite");
  const double bound = norm_bound(model);
  require(std::abs(target_energy()) <= bound, "sampler.energy: outside the spectral bound +-" + std::to_string(bound));
  if (sigma_mode == SigmaMode::fixed) {
    require(sigma.has_value(), "sampler.sigma: fixed mode needs a value");
    require(std::isfinite(*sigma) && *sigma > 0.0, "sampler.sigma: must be positive");
  }
  require(chi >= 1, "sampler.chi: must be >= 1");
  require(iterations >= 0, "sampler.iterations: must be >= 0");
  require(std::isfinite(compress_tol) && compress_tol > 0.0, "sampler.compress_tol: must be positive");
  require(max_sweeps >= 0, "sampler.max_sweeps: must be >= 0");
  require(record_every >= 1, "sampler.record_every: must be >= 1");
  require(samples >= 1, "sampler.samples: must be >= 1");
  for (int k : checkpoints) require(k >= 0 && k <= iterations, "sampler.checkpoints: outside [0, iterations]");
}

double SamplerConfig::target_energy() const {
  if (energy) return *energy;
  return energy_density.value_or(0.0) * static_cast<double>(model.sites);
}

double SamplerConfig::target_density() const { return target_energy() / static_cast<double>(model.sites); }

double SamplerConfig::resolved_sigma() const { return resolve_sigma(model, target_energy(), sigma_mode, sigma); }

std::vector<int> SamplerConfig::resolved_checkpoints() const {
  std::set<int> ks;
  if (checkpoints.empty()) {
    for (int k : {1, 10, 30, 100})
      if (k <= iterations) ks.insert(k);
    ks.insert(iterations);
  } else {
    ks.insert(checkpoints.begin(), checkpoints.end());
  }
  return {ks.begin(), ks.end()};
}

std::vector<int> SamplerConfig::recorded_iterations() const {
  std::set<int> ks{0, iterations};
  for (int k = record_every; k <= iterations; k += record_every) ks.insert(k);
  for (int k : resolved_checkpoints()) ks.insert(k);
  return {ks.begin(), ks.end()};
}

Sampler::Sampler(SamplerConfig config) : config_(std::move(config)) {
  config_.validate();
  energy_ = config_.target_energy();
  filter_ = build_filter<Complex>(config_.model, energy_, config_.resolved_sigma());
  recorded_ = config_.recorded_iterations();
}

SampleOutcome Sampler::run(std::uint64_t sample_index) const {
  SampleOutcome out;
  out.sample_index = sample_index;
  out.trace.sample_index = sample_index;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    auto stream = derive_stream(config_.seed, sample_index);
    MpsC psi = random_mps<Complex>(stream, config_.model.sites, 2, config_.chi);
    double log_scale = 0.0;
    auto next_record = recorded_.begin();

    auto record = [&](int k, double truncation, double decrement) {
      IterationRecord r;
      r.k = k;
      r.energy = real_expectation(filter_.h, psi);
      r.energy_variance = real_expectation(filter_.h_squared, psi) - r.energy * r.energy;
      r.truncation_error = truncation;
      r.log_norm_decrement = decrement;
      out.trace.records.push_back(r);
      ++next_record;
    };

    // psi always has unit norm; its tensors may not.
    record(0, nan, 0.0);
    for (int k = 1; k <= config_.iterations; ++k) {
      const bool recording = next_record != recorded_.end() && *next_record == k;
      ApplyOptions options;
      options.max_sweeps = config_.max_sweeps;
      options.compute_error = recording && config_.track_truncation;
      auto step = apply(filter_.g, psi, config_.chi, config_.compress_tol, options, &filter_.g_squared);
      out.half_sweeps += step.half_sweeps;
      const double decrement = step.state.log_norm();
      if (!std::isfinite(decrement)) throw NumericalFailure("sampler: non-finite norm");
      log_scale += decrement;
      psi = std::move(step.state);
      psi.set_log_norm(0.0);
      if (recording) record(k, step.truncation_error.value_or(nan), decrement);
    }
    if (config_.iterations > 0) psi.set_log_norm(log_scale);
    out.state = std::move(psi);
  } catch (const NumericalFailure& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

SampleOutcome run_sample(const SamplerConfig& config, std::uint64_t sample_index) {
  return Sampler(config).run(sample_index);
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) return std::nullopt;
  return sxy / sxx;
}

ConvergenceSummary convergence_diagnostics(const IterationTrace& trace, const SamplerConfig& config) {
  ConvergenceSummary s;
  if (trace.records.empty()) return s;
  std::vector<double> ks, vars;
  const int tail_start = std::max(10, trace.records.back().k / 2);
  for (const auto& r : trace.records)
    if (r.k >= tail_start && r.energy_variance > 0.0) {
      ks.push_back(r.k);
      vars.push_back(r.energy_variance);
    }
  s.tail_points = static_cast<int>(ks.size());
  s.variance_exponent = log_log_slope(ks, vars);

  const auto& last = trace.records.back();
  if (last.k < 1) return s;
  const double sigma = config.resolved_sigma();
  s.final_energy_offset = std::abs(last.energy - config.target_energy());
  s.final_variance = last.energy_variance;
  s.model_variance = sigma * sigma / (4.0 * last.k);
  s.alternative_variance = 4.0 * sigma * sigma / last.k;
  s.measured_over_model = last.energy_variance / *s.model_variance;
  return s;
}

}  // namespace rmps
