#pragma once

#include <algorithm>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "rmps/types.hpp"

namespace rmps::detail {

/// Thin SVD with singular values in descending order.
template <typename Scalar>
struct ThinSvd {
  Matrix<Scalar> u;
  Eigen::VectorXd s;
  Matrix<Scalar> v;
};

/// Divide-and-conquer SVD, checked. Eigen 3.4.0's BDCSVD occasionally
/// returns a wrong factorization for structured inputs with exact zeros and
/// degenerate singular values (MPO products hit this), so the result is
/// verified and recomputed with one-sided Jacobi when the check fails.
template <typename Scalar>
ThinSvd<Scalar> thin_svd(const Matrix<Scalar>& m) {
  ThinSvd<Scalar> out;
  const double scale = m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0 || std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }
  {
    Eigen::BDCSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out = {svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }
  const Index k = out.s.size();
  const double tol = 1e-11 * static_cast<double>(std::max(m.rows(), m.cols()));
  const double recon = (out.u * out.s.asDiagonal() * out.v.adjoint() - m).cwiseAbs().maxCoeff() / scale;
  const double ortho = (out.u.adjoint() * out.u - Matrix<Scalar>::Identity(k, k)).cwiseAbs().maxCoeff();
  const double ortho_v = (out.v.adjoint() * out.v - Matrix<Scalar>::Identity(k, k)).cwiseAbs().maxCoeff();
  if (recon <= tol && ortho <= tol && ortho_v <= tol) return out;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Number of singular values above rel_tol * s_max, clamped to [1, cap]
/// (cap <= 0 means no cap).
inline Index kept_count(const Eigen::VectorXd& s, double rel_tol, Index cap = 0) {
  Index keep = 0;
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  while (keep < s.size() && s(keep) > cutoff) ++keep;
  if (cap > 0) keep = std::min(keep, cap);
  return std::max<Index>(keep, 1);
}

/// theta ~= isometry * rest with isometry having at most max_bond orthonormal
/// columns spanning the dominant left singular subspace. Goes through the
/// smaller Gram matrix, which is several times cheaper than an SVD; the
/// projection itself is exact, only directions with weight below round-off
/// are dropped.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> dominant_range(const Matrix<Scalar>& theta, Index max_bond) {
  const bool wide = theta.rows() <= theta.cols();
  const Matrix<Scalar> gram = wide ? Matrix<Scalar>(theta * theta.adjoint()) : Matrix<Scalar>(theta.adjoint() * theta);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(gram);
  const Index dim = gram.rows();
  const auto& lambda = es.eigenvalues();  // ascending
  const double top = std::max(lambda(dim - 1), 0.0);
  Index keep = 0;
  while (keep < dim && keep < max_bond && lambda(dim - 1 - keep) > 1e-30 * top) ++keep;
  keep = std::max<Index>(keep, 1);
  const Matrix<Scalar> basis = es.eigenvectors().rightCols(keep).rowwise().reverse();
  if (wide) return {basis, basis.adjoint() * theta};
  // basis spans right singular vectors; orthonormalize theta * basis.
  const Matrix<Scalar> projected = theta * basis;
  Eigen::HouseholderQR<Matrix<Scalar>> qr(projected);
  const Index k = std::min(projected.rows(), keep);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(projected.rows(), k);
  Matrix<Scalar> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return {std::move(q), r * basis.adjoint()};
}

}  // namespace rmps::detail
