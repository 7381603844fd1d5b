#pragma once

#include <string_view>
#include <vector>

#include "rmps/error.hpp"
#include "rmps/model.hpp"
#include "rmps/mps.hpp"

namespace rmps {

enum class Pauli { x, y, z };

inline Pauli parse_pauli(std::string_view name) {
  if (name == "x") return Pauli::x;
  if (name == "y") return Pauli::y;
  if (name == "z") return Pauli::z;
  throw InvalidParameter("unknown Pauli label '" + std::string(name) + "'");
}

template <typename Scalar>
Matrix<Scalar> pauli_matrix(Pauli which) {
  switch (which) {
    case Pauli::x:
      return pauli::x<Scalar>();
    case Pauli::z:
      return pauli::z<Scalar>();
    case Pauli::y:
      if constexpr (is_complex_v<Scalar>) {
        Matrix<Scalar> m = Matrix<Scalar>::Zero(2, 2);
        m(0, 1) = Scalar(0, -1);
        m(1, 0) = Scalar(0, 1);
        return m;
      } else {
        throw InvalidParameter("pauli y needs complex scalars");
      }
  }
  return {};
}

namespace detail {

/// Transfer of a (bra x ket) left environment through one site with a local
/// operator inserted.
template <typename Scalar>
Matrix<Scalar> transfer_left(const Matrix<Scalar>& env, const std::vector<Matrix<Scalar>>& site,
                             const Matrix<Scalar>* op) {
  const Index d = static_cast<Index>(site.size());
  Matrix<Scalar> out = Matrix<Scalar>::Zero(site.front().cols(), site.front().cols());
  for (Index s = 0; s < d; ++s)
    for (Index t = 0; t < d; ++t) {
      const Scalar c = op ? (*op)(s, t) : Scalar(s == t ? 1 : 0);
      if (c == Scalar(0)) continue;
      out.noalias() += c * (site[static_cast<std::size_t>(s)].adjoint() * (env * site[static_cast<std::size_t>(t)]));
    }
  return out;
}

/// Right environments R[i] covering sites i..N-1, R[N] = 1.
template <typename Scalar>
std::vector<Matrix<Scalar>> right_overlaps(const Mps<Scalar>& state) {
  const Index n = state.size();
  std::vector<Matrix<Scalar>> right(static_cast<std::size_t>(n + 1));
  right[static_cast<std::size_t>(n)] = Matrix<Scalar>::Ones(1, 1);
  for (Index i = n - 1; i >= 0; --i) {
    const auto& r = right[static_cast<std::size_t>(i + 1)];
    Matrix<Scalar> out = Matrix<Scalar>::Zero(state.block(i, 0).rows(), state.block(i, 0).rows());
    for (const auto& a : state.site(i)) out.noalias() += a * r * a.adjoint();
    right[static_cast<std::size_t>(i)] = std::move(out);
  }
  return right;
}

template <typename Scalar>
double close_env(const Matrix<Scalar>& left, const Matrix<Scalar>& right) {
  // left is (bra x ket), right is (ket x bra) in the same bond.
  return static_cast<double>(std::real((left.transpose().cwiseProduct(right)).sum()));
}

}  // namespace detail

/// <sigma^a_i> for every site, one left-to-right pass against precomputed
/// right environments.
template <typename Scalar>
std::vector<double> local_expectations(const Mps<Scalar>& state, Pauli which) {
  if (state.local_dim() != 2) throw InvalidDimension("local_expectations: spin-1/2 chain required");
  const Matrix<Scalar> op = pauli_matrix<Scalar>(which);
  const auto right = detail::right_overlaps(state);
  const double norm_sq = static_cast<double>(std::real(right.front()(0, 0)));
  detail::require_finite_norm(norm_sq, "local_expectations");
  std::vector<double> values;
  Matrix<Scalar> left = Matrix<Scalar>::Ones(1, 1);
  for (Index i = 0; i < state.size(); ++i) {
    const auto with_op = detail::transfer_left(left, state.site(i), &op);
    values.push_back(detail::close_env(with_op, right[static_cast<std::size_t>(i + 1)]) / norm_sq);
    left = detail::transfer_left<Scalar>(left, state.site(i), nullptr);
  }
  return values;
}

/// (N - j)^{-1} sum_i <sz_i sz_{i+j}> over the valid pairs of the open chain.
template <typename Scalar>
double zz_correlation(const Mps<Scalar>& state, Index j) {
  const Index n = state.size();
  if (j < 1 || j > n - 1) throw InvalidParameter("zz_correlation: distance out of range");
  if (state.local_dim() != 2) throw InvalidDimension("zz_correlation: spin-1/2 chain required");
  const Matrix<Scalar> z = pauli::z<Scalar>();
  const auto right = detail::right_overlaps(state);
  const double norm_sq = static_cast<double>(std::real(right.front()(0, 0)));
  detail::require_finite_norm(norm_sq, "zz_correlation");
  double total = 0.0;
  Matrix<Scalar> left = Matrix<Scalar>::Ones(1, 1);
  for (Index i = 0; i + j < n; ++i) {
    Matrix<Scalar> string = detail::transfer_left(left, state.site(i), &z);
    for (Index k = i + 1; k < i + j; ++k) string = detail::transfer_left<Scalar>(string, state.site(k), nullptr);
    string = detail::transfer_left(string, state.site(i + j), &z);
    total += detail::close_env(string, right[static_cast<std::size_t>(i + j + 1)]);
    left = detail::transfer_left<Scalar>(left, state.site(i), nullptr);
  }
  return total / (norm_sq * static_cast<double>(n - j));
}

/// zz_correlation for j = 1..max_distance.
template <typename Scalar>
std::vector<double> zz_profile(const Mps<Scalar>& state, Index max_distance) {
  std::vector<double> out;
  for (Index j = 1; j <= max_distance; ++j) out.push_back(zz_correlation(state, j));
  return out;
}

}  // namespace rmps
