#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dense.hpp"
#include "rmps/mps.hpp"
#include "rmps/oracle.hpp"
#include "rmps/rng.hpp"

using namespace rmps;

namespace {

const SpinModel kChain8{ModelKind::heisenberg, 8, 1.0, 0.3};

const DenseSpectrum& spectrum8() {
  static const DenseSpectrum s = diagonalize(kChain8);
  return s;
}

Vector<Complex> random_dense(std::uint64_t index, Index sites) {
  auto stream = derive_stream(11, index);
  return to_dense(random_mps<Complex>(stream, sites, 2, 8));
}

}  // namespace

TEST(DenseHamiltonian, MatchesPauliStringAssembly) {
  for (const SpinModel& m : {kChain8, SpinModel{ModelKind::transverse_ising, 7, 0.7, 1.3},
                             SpinModel{ModelKind::heisenberg, 5, -1.0, 0.4}}) {
    const Eigen::MatrixXcd sparse = Eigen::MatrixXd(dense_hamiltonian(m)).cast<Complex>();
    EXPECT_LT((sparse - testing_dense::hamiltonian(m)).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(DenseHamiltonian, CapEnforced) {
  EXPECT_THROW(dense_hamiltonian(SpinModel{ModelKind::heisenberg, 15, 1.0, 0.0}), TooLarge);
  EXPECT_THROW(diagonalize(SpinModel{ModelKind::heisenberg, 20, 1.0, 0.0}), TooLarge);
  EXPECT_NO_THROW(dense_hamiltonian(SpinModel{ModelKind::heisenberg, 6, 1.0, 0.0}, 64));
  EXPECT_THROW(dense_hamiltonian(SpinModel{ModelKind::heisenberg, 7, 1.0, 0.0}, 64), TooLarge);
}

TEST(Diagonalize, TwoSiteSpectrum) {
  const auto s = diagonalize(SpinModel{ModelKind::heisenberg, 2, 1.0, 0.0});
  // J > 0 is ferromagnetic: triplet at -1/4, singlet at +3/4.
  ASSERT_EQ(s.eigenvalues.size(), 4);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.eigenvalues(i), -0.25, 1e-12);
  EXPECT_NEAR(s.eigenvalues(3), 0.75, 1e-12);
}

TEST(Diagonalize, ReconstructionAndOrdering) {
  for (const SpinModel& m : {kChain8, SpinModel{ModelKind::transverse_ising, 8, 1.0, 0.7}}) {
    const auto s = diagonalize(m);
    const Eigen::MatrixXd h(dense_hamiltonian(m));
    const Eigen::MatrixXd rebuilt = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    EXPECT_LE((h - rebuilt).cwiseAbs().maxCoeff(), 1e-9);
    for (Index i = 1; i < s.eigenvalues.size(); ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
    EXPECT_NEAR(s.eigenvalues.sum(), 0.0, 1e-9);
  }
}

TEST(Diagonalize, FieldReversalKeepsSpectrum) {
  SpinModel flipped = kChain8;
  flipped.field = -kChain8.field;
  const auto b = diagonalize(flipped);
  EXPECT_LT((spectrum8().eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Populations, EigenvectorIsIndicator) {
  const auto& s = spectrum8();
  const Vector<Complex> v = s.eigenvectors.col(37).cast<Complex>();
  const auto p = populations(v, s);
  EXPECT_NEAR(p(37), 1.0, 1e-10);
  EXPECT_NEAR(p.sum(), 1.0, 1e-10);
}

TEST(Populations, TwoEigenvectorSuperposition) {
  const auto& s = spectrum8();
  const Vector<Complex> v =
      (s.eigenvectors.col(3).cast<Complex>() + Complex(0, 1) * s.eigenvectors.col(100).cast<Complex>()) /
      std::sqrt(2.0);
  const auto p = populations(v, s);
  EXPECT_NEAR(p(3), 0.5, 1e-10);
  EXPECT_NEAR(p(100), 0.5, 1e-10);
}

TEST(Populations, RandomMpsSumsToOne) {
  const auto p = populations(random_dense(0, 8), spectrum8());
  EXPECT_NEAR(p.sum(), 1.0, 1e-10);
  EXPECT_GE(p.minCoeff(), 0.0);
}

TEST(Populations, DimensionMismatch) {
  EXPECT_THROW(populations(Vector<Complex>::Ones(16), spectrum8()), IncompatibleStates);
}

TEST(FilteredAverage, ZeroIterationsIsMaximallyMixed) {
  const auto& s = spectrum8();
  const auto mz = magnetization_diagonal(8);
  const double sigma = 10.0;
  EXPECT_NEAR(filtered_average(s, -2.0, sigma, 0, mz), mz.mean(), 1e-12);
  const Eigen::MatrixXd h(dense_hamiltonian(kChain8));
  EXPECT_NEAR(filtered_average(s, -2.0, sigma, 0, Eigen::MatrixXcd(h.cast<Complex>())), h.trace() / 256.0, 1e-12);
}

TEST(FilteredAverage, LargeKSelectsNearestLevel) {
  const auto& s = spectrum8();
  const Index level = 60;
  const double gap = std::min(s.eigenvalues(level) - s.eigenvalues(level - 1), s.eigenvalues(level + 1) - s.eigenvalues(level));
  ASSERT_GT(gap, 1e-6);
  const double sigma = 10.0, target = s.eigenvalues(level) + 0.1 * gap;
  // Neighbours are suppressed by exp(-2k (0.9 gap / sigma)^2) < exp(-40).
  const int k = static_cast<int>(std::min(2e9, 25.0 * sigma * sigma / (gap * gap)));
  const Eigen::MatrixXd h(dense_hamiltonian(kChain8));
  const double value = filtered_average(s, target, sigma, k, Eigen::MatrixXcd(h.cast<Complex>()));
  EXPECT_NEAR(value, s.eigenvalues(level), 1e-8);
}

TEST(FilteredAverage, DiagonalAndDenseObservablesAgree) {
  const auto& s = spectrum8();
  const auto zz = zz_diagonal(8, 2);
  const Eigen::MatrixXcd dense = zz.cast<Complex>().asDiagonal();
  EXPECT_NEAR(filtered_average(s, -1.5, 9.0, 40, zz), filtered_average(s, -1.5, 9.0, 40, dense), 1e-12);
}

TEST(FilteredAverage, DegenerateWindowDetected) {
  // Both two-site levels sit on the zeros of 1 - x^2, so every weight vanishes.
  const auto s = diagonalize(SpinModel{ModelKind::heisenberg, 2, 1.0, 0.0});
  EXPECT_THROW(filtered_average(s, 0.25, 0.5, 10, magnetization_diagonal(2)), DegenerateWindow);
}

TEST(FilterWeights, GaussianApproximationNearTarget) {
  const auto& s = spectrum8();
  const double e = -2.0, sigma = 9.65;
  const int k = 100;
  const auto log_w = log_filter_weights(s, e, sigma, k);
  int checked = 0;
  for (Index i = 0; i < s.eigenvalues.size(); ++i) {
    const double x = (s.eigenvalues(i) - e) / sigma;
    if (std::abs(x) > 0.25 || x == 0.0) continue;
    // [1 - x^2]^{2k} against exp(-2k x^2).
    const double gaussian = -2.0 * k * x * x;
    EXPECT_LE(std::abs(log_w(i) / gaussian - 1.0), 0.1);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(CanonicalAverage, HighTemperatureIsMaximallyMixed) {
  const auto mz = magnetization_diagonal(8);
  EXPECT_NEAR(canonical_average(spectrum8(), 1e6, mz), mz.mean(), 1e-6);
  const Eigen::MatrixXd h(dense_hamiltonian(kChain8));
  EXPECT_NEAR(canonical_average(spectrum8(), 1e6, Eigen::MatrixXcd(h.cast<Complex>())), 0.0, 1e-4);
}

TEST(CanonicalAverage, LowTemperatureIsGroundState) {
  const Eigen::MatrixXd h(dense_hamiltonian(kChain8));
  EXPECT_NEAR(canonical_average(spectrum8(), 1e-3, Eigen::MatrixXcd(h.cast<Complex>())), spectrum8().eigenvalues(0),
              1e-6);
  EXPECT_THROW(canonical_average(spectrum8(), 0.0, magnetization_diagonal(8)), InvalidParameter);
}

TEST(CanonicalAverage, MagnetizationMonotoneInField) {
  const auto mz = magnetization_diagonal(8);
  double previous = -1.0;
  for (int g = 0; g <= 10; ++g) {
    SpinModel m = kChain8;
    m.field = 0.1 * g;
    const double value = canonical_average(diagonalize(m), 1.0, mz);
    EXPECT_GE(value, previous - 1e-12);
    previous = value;
  }
}

TEST(DensePowerReplay, EigenvectorIsFixedPoint) {
  const auto& s = spectrum8();
  const Vector<Complex> v = s.eigenvectors.col(20).cast<Complex>();
  const auto replay = dense_power_replay(v, kChain8, -2.0, 9.65, 25);
  ASSERT_EQ(replay.energies.size(), 25U);
  for (double e : replay.energies) EXPECT_NEAR(e, s.eigenvalues(20), 1e-10);
}

TEST(DensePowerReplay, PopulationsFollowExactWeights) {
  const auto& s = spectrum8();
  const double e = -2.0, sigma = 9.65;
  const int k = 60;
  const Vector<Complex> psi0 = random_dense(1, 8);
  const auto replay = dense_power_replay(psi0, kChain8, e, sigma, k);
  const Eigen::VectorXd p0 = populations(psi0, s);
  const Eigen::VectorXd pk = populations(replay.final_state, s);
  // p_i(k) proportional to p_i(0) [1 - x_i^2]^{2k}.
  const Eigen::VectorXd log_w = log_filter_weights(s, e, sigma, k);
  Eigen::VectorXd expected = (p0.array() * (log_w.array() - log_w.maxCoeff()).exp()).matrix();
  expected /= expected.sum();
  EXPECT_LT((pk - expected).cwiseAbs().maxCoeff(), 1e-10);

  // The replayed variance equals the weighted variance of the evolved populations.
  const double mean = expected.dot(s.eigenvalues);
  const double variance = expected.dot((s.eigenvalues.array() - mean).square().matrix());
  EXPECT_NEAR(replay.energies.back(), mean, 1e-10);
  EXPECT_NEAR(replay.variances.back(), variance, 1e-10);
}

TEST(DensePowerReplay, RejectsBadInput) {
  EXPECT_THROW(dense_power_replay(Vector<Complex>::Ones(8), kChain8, 0.0, 1.0, 1), IncompatibleStates);
  EXPECT_THROW(dense_power_replay(random_dense(0, 8), kChain8, 0.0, -1.0, 1), InvalidParameter);
}

TEST(Diagonals, MagnetizationAndCorrelation) {
  const auto mz = magnetization_diagonal(4);
  EXPECT_DOUBLE_EQ(mz(0), 1.0);
  EXPECT_DOUBLE_EQ(mz(15), -1.0);
  // 0b0101 = up down up down: nearest neighbours anti-aligned.
  EXPECT_DOUBLE_EQ(zz_diagonal(4, 1)(5), -1.0);
  EXPECT_DOUBLE_EQ(zz_diagonal(4, 2)(5), 1.0);
  EXPECT_THROW(zz_diagonal(4, 4), InvalidParameter);
}

TEST(MatchingTemperature, ReproducesCanonicalEnergy) {
  const auto& s = spectrum8();
  const double t = matching_temperature(s, -2.0);
  EXPECT_NEAR(canonical_average(s, t, Eigen::MatrixXcd(Eigen::MatrixXd(dense_hamiltonian(kChain8)).cast<Complex>())), -2.0,
              1e-9);
  // Above the infinite-temperature mean there is no positive temperature.
  EXPECT_THROW(matching_temperature(s, 0.5), InvalidParameter);
  EXPECT_THROW(matching_temperature(s, s.eigenvalues(0) - 1.0), InvalidParameter);
}
