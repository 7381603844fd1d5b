#include <gtest/gtest.h>

#include <cmath>

#include "rmps/ensemble.hpp"
#include "rmps/io.hpp"
#include "rmps/mps.hpp"
#include "rmps/observables.hpp"
#include "rmps/rng.hpp"

using namespace rmps;

namespace {

SamplerConfig tiny_config(int samples) {
  SamplerConfig c;
  c.model = {ModelKind::heisenberg, 6, 1.0, 0.2};
  c.energy_density = -0.2;
  c.chi = 4;
  c.iterations = 12;
  c.record_every = 4;
  c.samples = samples;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(FitGaussian, ConstantSamples) {
  const std::vector<double> xs(10, 2.5);
  const auto f = fit_gaussian(xs);
  EXPECT_DOUBLE_EQ(f.mean, 2.5);
  EXPECT_DOUBLE_EQ(f.variance, 0.0);
  EXPECT_DOUBLE_EQ(f.ks_statistic, 0.0);
}

TEST(FitGaussian, TwoSamples) {
  const std::vector<double> xs{1.0, 4.0};
  const auto f = fit_gaussian(xs);
  EXPECT_DOUBLE_EQ(f.mean, 2.5);
  EXPECT_DOUBLE_EQ(f.variance, 4.5);
  EXPECT_DOUBLE_EQ(f.standard_error_mean, std::sqrt(4.5 / 2.0));
}

TEST(FitGaussian, KnownNormal) {
  auto stream = derive_stream(77, 0);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(3.0 + 2.0 * stream.normal());
  const auto f = fit_gaussian(xs);
  EXPECT_NEAR(f.mean, 3.0, 4.0 * std::sqrt(4.0 / 1e4));
  EXPECT_NEAR(f.variance, 4.0, 0.4);
  EXPECT_LT(f.ks_statistic, 1.6276 / 100.0);
}

TEST(FitGaussian, NeedsTwoSamples) {
  EXPECT_THROW(fit_gaussian(std::vector<double>{1.0}), InsufficientData);
  EXPECT_THROW(fit_gaussian(std::vector<double>{}), InsufficientData);
}

TEST(Estimate, EqualWeightsReduceToPlainMean) {
  const std::vector<double> v{1.0, 2.0, 6.0}, w(3, -4.0);
  const auto e = estimate(v, w);
  EXPECT_DOUBLE_EQ(e.mean, 3.0);
  EXPECT_NEAR(e.weighted_mean, 3.0, 1e-14);
  EXPECT_NEAR(*e.standard_error, std::sqrt(7.0 / 3.0), 1e-14);
}

TEST(Estimate, WeightsFollowSquaredNorm) {
  // log norms differ by log 2, so weights are 1 : 4.
  const std::vector<double> v{1.0, 0.0}, w{0.0, std::log(2.0)};
  const auto e = estimate(v, w);
  EXPECT_NEAR(e.weighted_mean, 0.2, 1e-14);
  EXPECT_DOUBLE_EQ(e.mean, 0.5);
}

TEST(Estimate, SingleSampleHasNoError) {
  const std::vector<double> v{0.3}, w{-1.0};
  const auto e = estimate(v, w);
  EXPECT_DOUBLE_EQ(e.mean, 0.3);
  EXPECT_FALSE(e.standard_error.has_value());
  EXPECT_FALSE(e.weighted_standard_error.has_value());
}

TEST(RunEnsemble, SingleSampleAggregates) {
  const auto r = run_ensemble(tiny_config(1), {.magnetization = true, .correlations = {1, 2}});
  ASSERT_EQ(r.samples.size(), 1U);
  EXPECT_DOUBLE_EQ(r.magnetization->mean, *r.samples[0].magnetization);
  EXPECT_FALSE(r.magnetization->standard_error.has_value());
  EXPECT_DOUBLE_EQ(r.correlations[1].second.mean, r.samples[0].correlations[1]);
  EXPECT_EQ(r.failed, 0);
}

TEST(RunEnsemble, ThreadCountDoesNotChangeOutput) {
  const auto c = tiny_config(6);
  const ObservableRequest req{.magnetization = true, .correlations = {1}};
  const auto one = run_ensemble(c, req, 1);
  const auto three = run_ensemble(c, req, 3);
  EXPECT_EQ(trace_table(one).str(), trace_table(three).str());
  EXPECT_EQ(histogram_table(one).str(), histogram_table(three).str());
  EXPECT_EQ(fits_table(one.fits).str(), fits_table(three.fits).str());
  EXPECT_EQ(one.magnetization->mean, three.magnetization->mean);
}

TEST(RunEnsemble, CheckpointFitsMatchRecords) {
  const auto r = run_ensemble(tiny_config(5));
  ASSERT_EQ(r.fits.size(), 3U);  // k = 1, 10, 12
  EXPECT_EQ(r.fits[0].k, 1);
  EXPECT_EQ(r.fits[2].k, 12);
  std::vector<double> energies;
  for (const auto& s : r.samples) energies.push_back(s.trace.records.back().energy);
  EXPECT_DOUBLE_EQ(r.fits[2].energy.mean, fit_gaussian(energies).mean);
  EXPECT_EQ(r.fits[2].energy.sample_count, 5);
}

TEST(RunEnsemble, StandardErrorShrinksWithSamples) {
  auto c = tiny_config(60);
  c.iterations = 0;
  const auto small = run_ensemble(c, {.magnetization = true, .correlations = {}});
  c.samples = 120;
  const auto large = run_ensemble(c, {.magnetization = true, .correlations = {}});
  const double ratio = *small.magnetization->standard_error / *large.magnetization->standard_error;
  EXPECT_NEAR(ratio, std::sqrt(2.0), 0.2 * std::sqrt(2.0));
}

TEST(RunEnsemble, ExplicitIndicesReuseSamples) {
  const auto c = tiny_config(4);
  const auto all = run_ensemble(c);
  const std::vector<std::uint64_t> idx{2, 3};
  const auto part = run_ensemble(c, {}, 1, idx);
  EXPECT_EQ(part.samples[0].trace.records.back().energy, all.samples[2].trace.records.back().energy);
}

TEST(MagnetizationCurve, SinglePointAndOrdering) {
  auto c = tiny_config(2);
  const auto one = magnetization_curve(c, {0.4});
  ASSERT_EQ(one.size(), 1U);
  EXPECT_DOUBLE_EQ(one[0].h, 0.4);
  EXPECT_NEAR(one[0].run.energy, c.target_energy(), 1e-12);

  const auto curve = magnetization_curve(c, {0.5, 0.0});
  ASSERT_EQ(curve.size(), 2U);
  EXPECT_DOUBLE_EQ(curve[0].h, 0.0);
  // Fixed energy density across the grid, distinct seeds per point.
  EXPECT_DOUBLE_EQ(curve[0].run.energy, curve[1].run.energy);
  EXPECT_NE(curve[0].run.config.seed, curve[1].run.config.seed);
  EXPECT_THROW(magnetization_curve(c, {}), InvalidParameter);
}

TEST(CorrelationProfile, AllUpStateGivesOne) {
  const auto up = product_state<Complex>(std::vector<int>(10, 0));
  for (Index j = 1; j < 10; ++j) EXPECT_NEAR(zz_correlation(up, j), 1.0, 1e-12);
}

TEST(CorrelationProfile, ReturnsRequestedDistances) {
  auto c = tiny_config(3);
  EnsembleResult run;
  const auto prof = correlation_profile(c, {1, 3}, 1, &run);
  ASSERT_EQ(prof.size(), 2U);
  EXPECT_EQ(prof[1].j, 3);
  EXPECT_EQ(run.samples.size(), 3U);
  EXPECT_THROW(correlation_profile(c, {6}), InvalidParameter);
}
