#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "dense.hpp"
#include "rmps/compress.hpp"
#include "rmps/mps.hpp"
#include "stats.hpp"

using namespace rmps;

namespace {

double phase_insensitive_distance(const Vector<Complex>& a, const Vector<Complex>& b) {
  const Complex overlap = a.dot(b);
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1);
  return (a * phase - b).cwiseAbs().maxCoeff();
}

/// Squared Schmidt values across cut c (sites [0, c) | [c, N)).
Eigen::VectorXd schmidt_weights(const Vector<Complex>& psi, int n, int c) {
  const Index rows = Index(1) << c;
  const Index cols = Index(1) << (n - c);
  // sigma_1 most significant: row-major reshape.
  Matrix<Complex> m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index q = 0; q < cols; ++q) m(r, q) = psi(r * cols + q);
  Eigen::JacobiSVD<Matrix<Complex>> svd(m);
  return svd.singularValues().array().square();
}

}  // namespace

TEST(RandomMps, TwoSiteProductOfHaarStates) {
  auto s = derive_stream(1, 0);
  const auto psi = random_mps<Complex>(s, 2, 2, 1);
  EXPECT_NEAR(norm(psi), 1.0, 1e-12);
  EXPECT_EQ(psi.max_bond(), 1);
}

TEST(RandomMps, BulkSitesLeftCanonical) {
  auto s = derive_stream(2, 0);
  const auto psi = random_mps<Complex>(s, 10, 2, 8);
  EXPECT_EQ(psi.canonical(), Canonical::left);
  EXPECT_LE(canonical_residual(psi, Canonical::left), 1e-10);
  EXPECT_NEAR(norm(psi), 1.0, 1e-12);
}

TEST(RandomMps, StorageBound) {
  auto s = derive_stream(2, 1);
  const auto psi = random_mps<Complex>(s, 12, 2, 16);
  EXPECT_LE(psi.parameter_count(), 2 * 12 * 16 * 16);
}

TEST(RandomMps, ParameterValidation) {
  auto s = derive_stream(2, 2);
  EXPECT_THROW(random_mps<Complex>(s, 1, 2, 4), InvalidParameter);
  EXPECT_THROW(random_mps<Complex>(s, 4, 1, 4), InvalidParameter);
  EXPECT_THROW(random_mps<Complex>(s, 4, 2, 0), InvalidParameter);
}

TEST(RandomMps, DenseNormIsOne) {
  auto s = derive_stream(3, 0);
  const auto psi = random_mps<Complex>(s, 8, 2, 4);
  EXPECT_NEAR(to_dense(psi).norm(), 1.0, 1e-10);
}

TEST(RandomMps, TracelessObservableAveragesToZero) {
  // The ensemble average of |psi><psi| is I/D, so <sigma^z_3> averages to 0.
  const Matrix<Complex> z3 = testing_dense::site_product(8, {{2, 'z'}});
  std::vector<double> values;
  for (std::uint64_t k = 0; k < 2000; ++k) {
    auto s = derive_stream(77, k);
    const auto v = to_dense(random_mps<Complex>(s, 8, 2, 4));
    values.push_back(std::real(v.dot(z3 * v)));
  }
  const auto m = testing_stats::moments(values);
  EXPECT_LT(std::abs(m.mean), 4 * m.standard_error);
}

TEST(InnerProduct, MatchesDense) {
  auto s = derive_stream(4, 0);
  const auto a = random_mps<Complex>(s, 8, 2, 4);
  const auto b = random_mps<Complex>(s, 8, 2, 4);
  const Complex dense = to_dense(a).dot(to_dense(b));
  EXPECT_LE(std::abs(inner_product(a, b) - dense), 1e-10);
  EXPECT_NEAR(std::real(inner_product(a, a)), 1.0, 1e-12);
}

TEST(InnerProduct, OrthogonalProductStates) {
  const auto up_up = product_state<Complex>({0, 0});
  const auto down_up = product_state<Complex>({1, 0});
  EXPECT_EQ(std::abs(inner_product(up_up, down_up)), 0.0);
}

TEST(InnerProduct, ShapeMismatchRejected) {
  EXPECT_THROW(inner_product(product_state<Complex>({0, 0}), product_state<Complex>({0, 0, 0})), IncompatibleStates);
}

TEST(ToDense, ProductStateHasSingleEntry) {
  const auto v = to_dense(product_state<Complex>({0, 1}));
  ASSERT_EQ(v.size(), 4);
  EXPECT_EQ(v(1), Complex(1));  // |up down> = index 0b01
  EXPECT_EQ(v.cwiseAbs().sum(), 1.0);
}

TEST(ToDense, CapEnforced) {
  EXPECT_THROW(to_dense(product_state<Complex>(std::vector<int>(12, 0)), 1024), TooLarge);
}

TEST(ToDense, LocalObservableMatchesContraction) {
  auto s = derive_stream(5, 0);
  const auto psi = random_mps<Complex>(s, 8, 2, 4);
  const auto v = to_dense(psi);
  const Matrix<Complex> x4 = testing_dense::site_product(8, {{4, 'x'}});
  const Complex dense = v.dot(x4 * v);
  // Contract <psi|X_4|psi> by hand through the tensors.
  Matrix<Complex> env = Matrix<Complex>::Ones(1, 1);
  const auto x = testing_dense::pauli('x');
  for (Index i = 0; i < 8; ++i) {
    Matrix<Complex> next = Matrix<Complex>::Zero(psi.block(i, 0).cols(), psi.block(i, 0).cols());
    for (Index a = 0; a < 2; ++a)
      for (Index b = 0; b < 2; ++b) {
        const Complex c = i == 4 ? x(a, b) : Complex(a == b ? 1 : 0);
        if (c != Complex(0)) next += c * psi.block(i, a).adjoint() * env * psi.block(i, b);
      }
    env = next;
  }
  EXPECT_LE(std::abs(env(0, 0) * std::exp(2 * psi.log_norm()) - dense), 1e-10);
}

TEST(Canonicalize, LeftInputUnchangedRay) {
  auto s = derive_stream(6, 0);
  const auto psi = random_mps<Complex>(s, 10, 2, 8);
  const auto out = canonicalize(psi, Canonical::left);
  EXPECT_NEAR(std::abs(inner_product(psi, out)), 1.0, 1e-12);
}

TEST(Canonicalize, RightConditionHolds) {
  auto s = derive_stream(6, 1);
  const auto psi = random_mps<Complex>(s, 10, 2, 8);
  const auto out = canonicalize(psi, Canonical::right);
  EXPECT_EQ(out.canonical(), Canonical::right);
  EXPECT_LE(canonical_residual(out, Canonical::right), 1e-10);
  EXPECT_NEAR(std::abs(inner_product(psi, out)), 1.0, 1e-10);
}

TEST(Canonicalize, DenseVectorsAgree) {
  auto s = derive_stream(6, 2);
  const auto psi = random_mps<Complex>(s, 8, 2, 4);
  for (auto dir : {Canonical::left, Canonical::right})
    EXPECT_LE(phase_insensitive_distance(to_dense(psi), to_dense(canonicalize(psi, dir))), 1e-10);
}

TEST(Canonicalize, GaugeInvariantNorm) {
  auto s = derive_stream(6, 3);
  auto psi = random_mps<Complex>(s, 8, 2, 4);
  psi.set_log_norm(psi.log_norm() + 3.0);
  const auto out = canonicalize(psi, Canonical::right);
  EXPECT_NEAR(norm(out) / norm(psi), 1.0, 1e-10);
}

TEST(Compress, LosslessAtOwnBond) {
  auto s = derive_stream(7, 0);
  const auto psi = random_mps<Complex>(s, 10, 2, 8);
  const auto out = compress(psi, 8);
  EXPECT_LE(out.truncation_error, 1e-12);
  EXPECT_LE(out.state.max_bond(), 8);
  EXPECT_NEAR(std::abs(inner_product(psi, out.state)), 1.0, 1e-12);
}

TEST(Compress, ProductStateToBondOne) {
  const auto psi = product_state<Complex>({0, 1, 1, 0, 1});
  const auto out = compress(psi, 1);
  EXPECT_LE(phase_insensitive_distance(to_dense(psi), to_dense(out.state)), 1e-12);
  EXPECT_LE(out.truncation_error, 1e-12);
}

TEST(Compress, SingleTruncatedCutMatchesSchmidtWeight) {
  // chi = 32 at N = 10 exceeds every cut rank except the middle one, so the
  // optimal error is exactly the discarded Schmidt weight there.
  auto s = derive_stream(8, 0);
  const auto psi = random_mps<Complex>(s, 10, 2, 32);
  const auto v = to_dense(psi);
  const auto w = schmidt_weights(v, 10, 5);
  const double discarded = w.tail(w.size() - 16).sum();
  const auto out = compress(psi, 16, 1e-13);
  EXPECT_NEAR(out.truncation_error, discarded, 1e-8);
  const double fidelity = std::norm(to_dense(out.state).dot(v)) / (to_dense(out.state).squaredNorm());
  EXPECT_NEAR(1.0 - fidelity, out.truncation_error, 1e-10);
}

TEST(Compress, SeveralTruncatedCutsBoundedBySchmidtWeights) {
  // chi 16 -> 8 at N = 10 truncates cuts 4, 5 and 6. The optimal error lies
  // between the worst single-cut weight and the sum over cuts.
  auto s = derive_stream(8, 1);
  const auto psi = random_mps<Complex>(s, 10, 2, 16);
  const auto v = to_dense(psi);
  double worst = 0.0, total = 0.0;
  for (int c = 1; c < 10; ++c) {
    const auto w = schmidt_weights(v, 10, c);
    const double discarded = w.size() > 8 ? w.tail(w.size() - 8).sum() : 0.0;
    worst = std::max(worst, discarded);
    total += discarded;
  }
  const auto out = compress(psi, 8, 1e-12);
  EXPECT_LE(out.state.max_bond(), 8);
  EXPECT_GE(out.truncation_error, worst - 1e-8);
  EXPECT_LE(out.truncation_error, total + 1e-8);
  const double fidelity = std::norm(to_dense(out.state).dot(v)) / (to_dense(out.state).squaredNorm());
  EXPECT_NEAR(1.0 - fidelity, out.truncation_error, 1e-10);
}

TEST(Compress, SweepsDoNotWorsenSequentialTruncation) {
  auto s = derive_stream(8, 2);
  const auto psi = random_mps<Complex>(s, 12, 2, 16);
  const auto one = compress(psi, 6, 1e-9, 0);
  const auto many = compress(psi, 6, 1e-12, 8);
  EXPECT_LE(many.truncation_error, one.truncation_error + 1e-12);
}

TEST(Compress, NonFiniteEntriesRejected) {
  auto s = derive_stream(9, 0);
  auto psi = random_mps<Complex>(s, 6, 2, 4);
  psi.site(2)[0](0, 0) = Complex(std::nan(""), 0);
  EXPECT_THROW(compress(psi, 4), NumericalFailure);
}

TEST(Compress, RejectsZeroBond) {
  EXPECT_THROW(compress(product_state<Complex>({0, 0}), 0), InvalidParameter);
}
