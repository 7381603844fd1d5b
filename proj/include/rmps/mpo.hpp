#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>


#include "rmps/error.hpp"
#include "rmps/linalg.hpp"
#include "rmps/mps.hpp"
#include "rmps/types.hpp"

namespace rmps {

/// Matrix product operator. Site i stores d*d blocks W^{s,t} (acting as
/// |s><t|) of shape opbond(i) x opbond(i+1), indexed s * d + t.
template <typename Scalar_>
class Mpo {
 public:
  using Scalar = Scalar_;
  using MatrixType = Matrix<Scalar>;
  using SiteTensor = std::vector<MatrixType>;

  Mpo() = default;

  Mpo(std::vector<SiteTensor> sites, Index local_dim, bool hermitian = false)
      : sites_(std::move(sites)), local_dim_(local_dim), hermitian_(hermitian) {
    validate();
  }

  Index size() const { return static_cast<Index>(sites_.size()); }
  Index local_dim() const { return local_dim_; }
  bool hermitian() const { return hermitian_; }
  void set_hermitian(bool flag) { hermitian_ = flag; }

  std::vector<Index> bond_dims() const {
    std::vector<Index> dims;
    for (const auto& site : sites_) dims.push_back(site.front().rows());
    dims.push_back(sites_.empty() ? 1 : sites_.back().front().cols());
    return dims;
  }

  /// Largest operator bond; for chains long enough this is the bulk bond.
  Index max_bond() const {
    const auto dims = bond_dims();
    return *std::max_element(dims.begin(), dims.end());
  }

  const SiteTensor& site(Index i) const { return sites_[static_cast<std::size_t>(i)]; }
  SiteTensor& site(Index i) { return sites_[static_cast<std::size_t>(i)]; }
  const MatrixType& block(Index i, Index s, Index t) const {
    return sites_[static_cast<std::size_t>(i)][static_cast<std::size_t>(s * local_dim_ + t)];
  }
  const std::vector<SiteTensor>& sites() const { return sites_; }

  void validate() const {
    if (sites_.empty()) throw InvalidDimension("Mpo: no sites");
    const auto blocks = static_cast<std::size_t>(local_dim_ * local_dim_);
    Index left = 1;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      if (sites_[i].size() != blocks) throw InvalidDimension("Mpo: wrong number of blocks");
      const Index right = sites_[i].front().cols();
      for (const auto& b : sites_[i])
        if (b.rows() != left || b.cols() != right)
          throw InvalidDimension("Mpo: inconsistent operator bonds at site " + std::to_string(i));
      left = right;
    }
    if (left != 1) throw InvalidDimension("Mpo: right boundary bond must be 1");
  }

 private:
  std::vector<SiteTensor> sites_;
  Index local_dim_ = 0;
  bool hermitian_ = false;
};

using MpoC = Mpo<Complex>;
using MpoR = Mpo<double>;

namespace detail {

template <typename Scalar>
Matrix<Scalar> kron(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  Matrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

template <typename Scalar>
Mpo<Scalar> identity_mpo(Index sites, Index d) {
  if (sites < 1 || d < 1) throw InvalidDimension("identity_mpo: empty chain");
  std::vector<typename Mpo<Scalar>::SiteTensor> tensors;
  for (Index i = 0; i < sites; ++i) {
    typename Mpo<Scalar>::SiteTensor site(static_cast<std::size_t>(d * d), Matrix<Scalar>::Zero(1, 1));
    for (Index s = 0; s < d; ++s) site[static_cast<std::size_t>(s * d + s)](0, 0) = Scalar(1);
    tensors.push_back(std::move(site));
  }
  return Mpo<Scalar>(std::move(tensors), d, true);
}

template <typename To, typename From>
Mpo<To> cast(const Mpo<From>& op) {
  std::vector<typename Mpo<To>::SiteTensor> tensors;
  for (const auto& site : op.sites()) {
    typename Mpo<To>::SiteTensor out;
    for (const auto& b : site) out.push_back(b.template cast<To>());
    tensors.push_back(std::move(out));
  }
  return Mpo<To>(std::move(tensors), op.local_dim(), op.hermitian());
}

/// Operator product a * b. Bond index (wa, wb) -> wa * bond_b + wb.
template <typename Scalar>
Mpo<Scalar> mpo_product(const Mpo<Scalar>& a, const Mpo<Scalar>& b) {
  if (a.size() != b.size() || a.local_dim() != b.local_dim())
    throw IncompatibleStates("mpo_product: operators differ in length or local dimension");
  const Index d = a.local_dim();
  std::vector<typename Mpo<Scalar>::SiteTensor> tensors;
  for (Index i = 0; i < a.size(); ++i) {
    const Index ar = a.block(i, 0, 0).rows(), ac = a.block(i, 0, 0).cols();
    const Index br = b.block(i, 0, 0).rows(), bc = b.block(i, 0, 0).cols();
    typename Mpo<Scalar>::SiteTensor site(static_cast<std::size_t>(d * d), Matrix<Scalar>::Zero(ar * br, ac * bc));
    for (Index s = 0; s < d; ++s)
      for (Index u = 0; u < d; ++u) {
        auto& out = site[static_cast<std::size_t>(s * d + u)];
        for (Index t = 0; t < d; ++t) out += detail::kron(a.block(i, s, t), b.block(i, t, u));
      }
    tensors.push_back(std::move(site));
  }
  return Mpo<Scalar>(std::move(tensors), d, false);
}

template <typename Scalar>
Mpo<Scalar> adjoint(const Mpo<Scalar>& op) {
  const Index d = op.local_dim();
  std::vector<typename Mpo<Scalar>::SiteTensor> tensors;
  for (Index i = 0; i < op.size(); ++i) {
    typename Mpo<Scalar>::SiteTensor site(static_cast<std::size_t>(d * d));
    for (Index s = 0; s < d; ++s)
      for (Index t = 0; t < d; ++t) site[static_cast<std::size_t>(s * d + t)] = op.block(i, t, s).conjugate();
    tensors.push_back(std::move(site));
  }
  return Mpo<Scalar>(std::move(tensors), d, op.hermitian());
}

/// Weighted direct sum sum_k c_k O_k. Bulk bonds add up; each coefficient is
/// folded into the first site.
template <typename Scalar>
Mpo<Scalar> mpo_sum(const std::vector<std::pair<Scalar, Mpo<Scalar>>>& terms) {
  if (terms.empty()) throw InvalidParameter("mpo_sum: no terms");
  const Index n = terms.front().second.size();
  const Index d = terms.front().second.local_dim();
  for (const auto& [c, op] : terms)
    if (op.size() != n || op.local_dim() != d) throw IncompatibleStates("mpo_sum: operators differ in shape");

  std::vector<typename Mpo<Scalar>::SiteTensor> tensors;
  for (Index i = 0; i < n; ++i) {
    Index rows = 0, cols = 0;
    for (const auto& term : terms) {
      rows += term.second.block(i, 0, 0).rows();
      cols += term.second.block(i, 0, 0).cols();
    }
    if (i == 0) rows = 1;
    if (i == n - 1) cols = 1;
    typename Mpo<Scalar>::SiteTensor site(static_cast<std::size_t>(d * d), Matrix<Scalar>::Zero(rows, cols));
    Index r0 = 0, c0 = 0;
    for (const auto& [coeff, op] : terms) {
      const Index br = op.block(i, 0, 0).rows(), bc = op.block(i, 0, 0).cols();
      const Index rr = (i == 0) ? 0 : r0;
      const Index cc = (i == n - 1) ? 0 : c0;
      const Scalar scale = (i == 0) ? coeff : Scalar(1);
      for (Index k = 0; k < d * d; ++k)
        site[static_cast<std::size_t>(k)].block(rr, cc, br, bc) += scale * op.site(i)[static_cast<std::size_t>(k)];
      r0 += br;
      c0 += bc;
    }
    tensors.push_back(std::move(site));
  }
  bool hermitian = true;
  for (const auto& [c, op] : terms) hermitian = hermitian && op.hermitian() && std::imag(c) == 0.0;
  return Mpo<Scalar>(std::move(tensors), d, hermitian);
}

/// Operator-space compression: the MPO is treated as a state with local
/// dimension d^2 and truncated right to left from left-canonical form,
/// dropping singular values below rel_tol times the largest at each cut.
/// The left-canonical pass also uses truncated SVD: a plain QR of the
/// rank-deficient product tensors lets round-off directions accumulate into
/// spurious singular values on long chains.
template <typename Scalar>
Mpo<Scalar> compress_mpo(const Mpo<Scalar>& op, double rel_tol = 1e-12, Index max_bond = 0) {
  const Index dd = op.local_dim() * op.local_dim();
  auto sites = op.sites();
  const std::size_t n = sites.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto svd = detail::thin_svd(detail::stack_rows(sites[i]));
    const Index keep = detail::kept_count(svd.s, 1e-14);
    sites[i] = detail::split_rows(Matrix<Scalar>(svd.u.leftCols(keep)), dd);
    const Matrix<Scalar> carry = svd.s.head(keep).asDiagonal() * svd.v.leftCols(keep).adjoint();
    for (auto& b : sites[i + 1]) b = (carry * b).eval();
  }
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto svd = detail::thin_svd(detail::stack_cols(sites[i]));
    const Index keep = detail::kept_count(svd.s, rel_tol, max_bond);
    sites[i] = detail::split_cols(Matrix<Scalar>(svd.v.leftCols(keep).adjoint()), dd);
    const Matrix<Scalar> carry = svd.u.leftCols(keep) * svd.s.head(keep).asDiagonal();
    for (auto& b : sites[i - 1]) b = (b * carry).eval();
  }
  return Mpo<Scalar>(std::move(sites), op.local_dim(), op.hermitian());
}

/// Dense operator matrix, sigma_1 most significant.
template <typename Scalar>
Matrix<Scalar> to_dense(const Mpo<Scalar>& op, Index cap = Index(1) << 12) {
  const Index d = op.local_dim();
  double dim = 1.0;
  for (Index i = 0; i < op.size(); ++i) dim *= static_cast<double>(d);
  if (dim > static_cast<double>(cap)) throw TooLarge("to_dense(Mpo): dimension exceeds cap");
  std::vector<Matrix<Scalar>> partial{Matrix<Scalar>::Ones(1, 1)};
  for (Index i = 0; i < op.size(); ++i) {
    const Index rows = partial.front().rows();
    const Index wr = op.block(i, 0, 0).cols();
    std::vector<Matrix<Scalar>> next(static_cast<std::size_t>(wr), Matrix<Scalar>::Zero(rows * d, rows * d));
    for (std::size_t w = 0; w < partial.size(); ++w)
      for (Index s = 0; s < d; ++s)
        for (Index t = 0; t < d; ++t) {
          const auto& wblock = op.block(i, s, t);
          for (Index v = 0; v < wr; ++v) {
            const Scalar c = wblock(static_cast<Index>(w), v);
            if (c == Scalar(0)) continue;
            auto& target = next[static_cast<std::size_t>(v)];
            for (Index r = 0; r < rows; ++r)
              for (Index q = 0; q < rows; ++q) target(r * d + s, q * d + t) += c * partial[w](r, q);
          }
        }
    partial = std::move(next);
  }
  return partial.front();
}

}  // namespace rmps
