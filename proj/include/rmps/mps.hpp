#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "rmps/error.hpp"
#include "rmps/rng.hpp"
#include "rmps/types.hpp"

namespace rmps {

enum class Canonical { none, left, right };

/// Open-boundary matrix product state.
///
/// Site i holds d blocks A^s of shape bond(i) x bond(i+1); the outer bonds
/// are 1. The represented vector is exp(log_norm) times the plain tensor
/// contraction, so normalization can be carried in log scale without touching
/// the tensors.
template <typename Scalar_>
class Mps {
 public:
  using Scalar = Scalar_;
  using MatrixType = Matrix<Scalar>;
  using SiteTensor = std::vector<MatrixType>;

  Mps() = default;

  explicit Mps(std::vector<SiteTensor> sites, double log_norm = 0.0,
               Canonical canonical = Canonical::none)
      : sites_(std::move(sites)), log_norm_(log_norm), canonical_(canonical) {
    validate();
  }

  Index size() const { return static_cast<Index>(sites_.size()); }
  Index local_dim() const { return sites_.empty() ? 0 : static_cast<Index>(sites_.front().size()); }

  /// N + 1 bond dimensions, first and last equal to 1.
  std::vector<Index> bond_dims() const {
    std::vector<Index> dims;
    dims.reserve(sites_.size() + 1);
    for (const auto& site : sites_) dims.push_back(site.front().rows());
    dims.push_back(sites_.empty() ? 1 : sites_.back().front().cols());
    return dims;
  }

  Index max_bond() const {
    const auto dims = bond_dims();
    return *std::max_element(dims.begin(), dims.end());
  }

  /// Number of stored complex (or real) coefficients.
  Index parameter_count() const {
    Index count = 0;
    for (const auto& site : sites_)
      for (const auto& block : site) count += block.size();
    return count;
  }

  const SiteTensor& site(Index i) const { return sites_[static_cast<std::size_t>(i)]; }
  SiteTensor& site(Index i) { return sites_[static_cast<std::size_t>(i)]; }
  const MatrixType& block(Index i, Index s) const { return site(i)[static_cast<std::size_t>(s)]; }
  const std::vector<SiteTensor>& sites() const { return sites_; }

  double log_norm() const { return log_norm_; }
  void set_log_norm(double value) { log_norm_ = value; }
  Canonical canonical() const { return canonical_; }
  void set_canonical(Canonical tag) { canonical_ = tag; }

  void validate() const {
    if (sites_.empty()) throw InvalidDimension("Mps: no sites");
    const auto d = sites_.front().size();
    if (d == 0) throw InvalidDimension("Mps: zero local dimension");
    Index left = 1;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      const auto& site = sites_[i];
      if (site.size() != d) throw InvalidDimension("Mps: inconsistent local dimension");
      const Index right = site.front().cols();
      for (const auto& block : site)
        if (block.rows() != left || block.cols() != right)
          throw InvalidDimension("Mps: inconsistent bond dimensions at site " + std::to_string(i));
      left = right;
    }
    if (left != 1) throw InvalidDimension("Mps: right boundary bond must be 1");
  }

 private:
  std::vector<SiteTensor> sites_;
  double log_norm_ = 0.0;
  Canonical canonical_ = Canonical::none;
};

using MpsC = Mps<Complex>;
using MpsR = Mps<double>;

namespace detail {

/// Blocks stacked vertically: row s * Dl + l.
template <typename Scalar>
Matrix<Scalar> stack_rows(const std::vector<Matrix<Scalar>>& blocks) {
  const Index rows = blocks.front().rows();
  Matrix<Scalar> out(rows * static_cast<Index>(blocks.size()), blocks.front().cols());
  for (std::size_t s = 0; s < blocks.size(); ++s) out.middleRows(static_cast<Index>(s) * rows, rows) = blocks[s];
  return out;
}

/// Blocks side by side: column s * Dr + r.
template <typename Scalar>
Matrix<Scalar> stack_cols(const std::vector<Matrix<Scalar>>& blocks) {
  const Index cols = blocks.front().cols();
  Matrix<Scalar> out(blocks.front().rows(), cols * static_cast<Index>(blocks.size()));
  for (std::size_t s = 0; s < blocks.size(); ++s) out.middleCols(static_cast<Index>(s) * cols, cols) = blocks[s];
  return out;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> split_rows(const Matrix<Scalar>& m, Index d) {
  const Index rows = m.rows() / d;
  std::vector<Matrix<Scalar>> blocks(static_cast<std::size_t>(d));
  for (Index s = 0; s < d; ++s) blocks[static_cast<std::size_t>(s)] = m.middleRows(s * rows, rows);
  return blocks;
}

template <typename Scalar>
std::vector<Matrix<Scalar>> split_cols(const Matrix<Scalar>& m, Index d) {
  const Index cols = m.cols() / d;
  std::vector<Matrix<Scalar>> blocks(static_cast<std::size_t>(d));
  for (Index s = 0; s < d; ++s) blocks[static_cast<std::size_t>(s)] = m.middleCols(s * cols, cols);
  return blocks;
}

/// Thin QR, m = q * r with q having min(rows, cols) orthonormal columns.
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> thin_qr(const Matrix<Scalar>& m) {
  const Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix<Scalar>> qr(m);
  Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(m.rows(), k);
  Matrix<Scalar> r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

template <typename Scalar>
double frobenius_norm(const std::vector<Matrix<Scalar>>& blocks) {
  double sq = 0.0;
  for (const auto& b : blocks) sq += b.squaredNorm();
  return std::sqrt(sq);
}

inline void require_finite_norm(double norm, const char* where) {
  if (!std::isfinite(norm)) throw NumericalFailure(std::string(where) + ": non-finite tensor entries");
  if (!(norm > 0.0)) throw NumericalFailure(std::string(where) + ": state has zero norm");
}

/// Left-orthonormalize site i and push the remainder into site i + 1.
template <typename Scalar>
void left_orthonormalize_site(std::vector<std::vector<Matrix<Scalar>>>& sites, std::size_t i) {
  const Index d = static_cast<Index>(sites[i].size());
  auto [q, r] = thin_qr(stack_rows(sites[i]));
  sites[i] = split_rows(q, d);
  for (auto& block : sites[i + 1]) block = (r * block).eval();
}

/// Right-orthonormalize site i and push the remainder into site i - 1.
template <typename Scalar>
void right_orthonormalize_site(std::vector<std::vector<Matrix<Scalar>>>& sites, std::size_t i) {
  const Index d = static_cast<Index>(sites[i].size());
  const Matrix<Scalar> m = stack_cols(sites[i]);
  auto [q, r] = thin_qr(Matrix<Scalar>(m.adjoint()));
  sites[i] = split_cols(Matrix<Scalar>(q.adjoint()), d);
  const Matrix<Scalar> carry = r.adjoint();
  for (auto& block : sites[i - 1]) block = (block * carry).eval();
}

}  // namespace detail

/// Product state from per-site basis labels, bond dimension 1.
template <typename Scalar>
Mps<Scalar> product_state(const std::vector<int>& labels, Index d = 2) {
  if (labels.empty()) throw InvalidDimension("product_state: no sites");
  std::vector<typename Mps<Scalar>::SiteTensor> sites;
  for (int label : labels) {
    if (label < 0 || label >= d) throw InvalidParameter("product_state: label out of range");
    typename Mps<Scalar>::SiteTensor site(static_cast<std::size_t>(d), Matrix<Scalar>::Zero(1, 1));
    site[static_cast<std::size_t>(label)](0, 0) = Scalar(1);
    sites.push_back(std::move(site));
  }
  return Mps<Scalar>(std::move(sites), 0.0, Canonical::left);
}

/// Random MPS from Haar blocks. Bulk site i takes the first chi columns of an
/// independent Haar unitary of dimension d * chi and splits them into d
/// stacked chi x chi blocks, so bulk sites are left-isometries. The boundary
/// row and column vectors are the d segments of Haar unit vectors of length
/// d * chi. The tensors are left as drawn; log_norm normalizes the state.
template <typename Scalar>
Mps<Scalar> random_mps(RngStream& stream, Index sites, Index d, Index chi) {
  if (sites < 2) throw InvalidParameter("random_mps: need at least 2 sites");
  if (d < 2) throw InvalidParameter("random_mps: local dimension must be >= 2");
  if (chi < 1) throw InvalidParameter("random_mps: bond dimension must be >= 1");
  using MatrixType = Matrix<Scalar>;
  std::vector<typename Mps<Scalar>::SiteTensor> tensors;
  tensors.reserve(static_cast<std::size_t>(sites));

  {
    const Vector<Scalar> v = haar_unit_vector<Scalar>(stream, d * chi);
    typename Mps<Scalar>::SiteTensor site;
    for (Index s = 0; s < d; ++s) site.push_back(MatrixType(v.segment(s * chi, chi).transpose()));
    tensors.push_back(std::move(site));
  }
  for (Index i = 1; i + 1 < sites; ++i) {
    const MatrixType u = haar_unitary<Scalar>(stream, d * chi);
    tensors.push_back(detail::split_rows(MatrixType(u.leftCols(chi)), d));
  }
  {
    const Vector<Scalar> v = haar_unit_vector<Scalar>(stream, d * chi);
    typename Mps<Scalar>::SiteTensor site;
    for (Index s = 0; s < d; ++s) site.push_back(MatrixType(v.segment(s * chi, chi)));
    tensors.push_back(std::move(site));
  }

  Mps<Scalar> state(std::move(tensors), 0.0, Canonical::left);
  const double raw_norm = std::sqrt(std::real(inner_product(state, state)));
  detail::require_finite_norm(raw_norm, "random_mps");
  state.set_log_norm(-std::log(raw_norm));
  return state;
}

/// <bra|ket> including both log_norm scales.
template <typename Scalar>
Scalar inner_product(const Mps<Scalar>& bra, const Mps<Scalar>& ket) {
  if (bra.size() != ket.size() || bra.local_dim() != ket.local_dim())
    throw IncompatibleStates("inner_product: states differ in length or local dimension");
  Matrix<Scalar> env = Matrix<Scalar>::Ones(1, 1);
  const Index d = ket.local_dim();
  for (Index i = 0; i < ket.size(); ++i) {
    Matrix<Scalar> next = Matrix<Scalar>::Zero(bra.block(i, 0).cols(), ket.block(i, 0).cols());
    for (Index s = 0; s < d; ++s) next.noalias() += bra.block(i, s).adjoint() * (env * ket.block(i, s));
    env = std::move(next);
  }
  return env(0, 0) * Scalar(std::exp(bra.log_norm() + ket.log_norm()));
}

template <typename Scalar>
double norm(const Mps<Scalar>& state) {
  return std::sqrt(std::max(0.0, static_cast<double>(std::real(inner_product(state, state)))));
}

/// Dense coefficient vector, sigma_1 most significant.
template <typename Scalar>
Vector<Scalar> to_dense(const Mps<Scalar>& state, Index cap = Index(1) << 20) {
  const Index d = state.local_dim();
  double dim = 1.0;
  for (Index i = 0; i < state.size(); ++i) dim *= static_cast<double>(d);
  if (dim > static_cast<double>(cap)) throw TooLarge("to_dense: dimension exceeds cap");
  Matrix<Scalar> partial = Matrix<Scalar>::Ones(1, 1);
  for (Index i = 0; i < state.size(); ++i) {
    const Index rows = partial.rows();
    Matrix<Scalar> next(rows * d, state.block(i, 0).cols());
    for (Index s = 0; s < d; ++s) {
      const Matrix<Scalar> piece = partial * state.block(i, s);
      for (Index r = 0; r < rows; ++r) next.row(r * d + s) = piece.row(r);
    }
    partial = std::move(next);
  }
  return Vector<Scalar>(partial.col(0)) * Scalar(std::exp(state.log_norm()));
}

/// Brings the state into left or right canonical form. The tensors end up
/// unit-norm with the scale moved into log_norm; the represented vector is
/// unchanged. Thin QR also trims bonds that exceed the local rank.
template <typename Scalar>
Mps<Scalar> canonicalize(const Mps<Scalar>& state, Canonical direction) {
  if (direction == Canonical::none) return state;
  auto sites = state.sites();
  const std::size_t n = sites.size();
  std::size_t center = 0;
  if (direction == Canonical::left) {
    for (std::size_t i = 0; i + 1 < n; ++i) detail::left_orthonormalize_site(sites, i);
    center = n - 1;
  } else {
    for (std::size_t i = n - 1; i > 0; --i) detail::right_orthonormalize_site(sites, i);
    center = 0;
  }
  const double center_norm = detail::frobenius_norm(sites[center]);
  detail::require_finite_norm(center_norm, "canonicalize");
  for (auto& block : sites[center]) block /= Scalar(center_norm);
  return Mps<Scalar>(std::move(sites), state.log_norm() + std::log(center_norm), direction);
}

/// Largest max-entry deviation from the canonical condition over bulk sites
/// (sites 2..N-1 in one-based numbering).
template <typename Scalar>
double canonical_residual(const Mps<Scalar>& state, Canonical direction) {
  double worst = 0.0;
  for (Index i = 1; i + 1 < state.size(); ++i) {
    const auto& site = state.site(i);
    const bool left = direction == Canonical::left;
    const Index dim = left ? site.front().cols() : site.front().rows();
    Matrix<Scalar> acc = Matrix<Scalar>::Zero(dim, dim);
    for (const auto& a : site) acc.noalias() += left ? Matrix<Scalar>(a.adjoint() * a) : Matrix<Scalar>(a * a.adjoint());
    acc -= Matrix<Scalar>::Identity(dim, dim);
    worst = std::max(worst, static_cast<double>(acc.cwiseAbs().maxCoeff()));
  }
  return worst;
}

}  // namespace rmps
