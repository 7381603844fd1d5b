#pragma once

#include <cmath>
#include <vector>

#include "rmps/error.hpp"
#include "rmps/mpo.hpp"
#include "rmps/mps.hpp"

namespace rmps {

/// Environment of a <bra|O|ket> network: one matrix per operator bond index.
/// Left environments are (bra bond x ket bond), right environments are
/// (ket bond x bra bond).
template <typename Scalar>
using Environment = std::vector<Matrix<Scalar>>;

namespace detail {

template <typename Scalar>
Environment<Scalar> boundary_environment() {
  return Environment<Scalar>{Matrix<Scalar>::Ones(1, 1)};
}

/// Absorbs site i into a left environment.
template <typename Scalar>
Environment<Scalar> update_left(const Environment<Scalar>& left, const std::vector<Matrix<Scalar>>& bra,
                                const Mpo<Scalar>& op, Index i, const std::vector<Matrix<Scalar>>& ket) {
  const Index d = op.local_dim();
  const Index wl = static_cast<Index>(left.size());
  const Index wr = op.block(i, 0, 0).cols();
  const Index bl = bra.front().rows(), br = bra.front().cols();
  const Index kr = ket.front().cols();

  const Matrix<Scalar> ket_cols = stack_cols(ket);
  std::vector<Matrix<Scalar>> partial(static_cast<std::size_t>(wl));
  for (Index w = 0; w < wl; ++w) partial[static_cast<std::size_t>(w)].noalias() = left[static_cast<std::size_t>(w)] * ket_cols;

  const Matrix<Scalar> bra_rows = stack_rows(bra);
  Environment<Scalar> out(static_cast<std::size_t>(wr));
  Matrix<Scalar> gathered(d * bl, kr);
  for (Index v = 0; v < wr; ++v) {
    gathered.setZero();
    bool any = false;
    for (Index s = 0; s < d; ++s)
      for (Index t = 0; t < d; ++t) {
        const auto& wblock = op.block(i, s, t);
        for (Index w = 0; w < wl; ++w) {
          const Scalar c = wblock(w, v);
          if (c == Scalar(0)) continue;
          gathered.middleRows(s * bl, bl) += c * partial[static_cast<std::size_t>(w)].middleCols(t * kr, kr);
          any = true;
        }
      }
    if (any)
      out[static_cast<std::size_t>(v)].noalias() = bra_rows.adjoint() * gathered;
    else
      out[static_cast<std::size_t>(v)] = Matrix<Scalar>::Zero(br, kr);
  }
  return out;
}

/// Absorbs site i into a right environment.
template <typename Scalar>
Environment<Scalar> update_right(const Environment<Scalar>& right, const std::vector<Matrix<Scalar>>& bra,
                                 const Mpo<Scalar>& op, Index i, const std::vector<Matrix<Scalar>>& ket) {
  const Index d = op.local_dim();
  const Index wl = op.block(i, 0, 0).rows();
  const Index wr = static_cast<Index>(right.size());
  const Index bl = bra.front().rows(), br = bra.front().cols();
  const Index kl = ket.front().rows();

  const Matrix<Scalar> ket_rows = stack_rows(ket);
  std::vector<Matrix<Scalar>> partial(static_cast<std::size_t>(wr));
  for (Index v = 0; v < wr; ++v) partial[static_cast<std::size_t>(v)].noalias() = ket_rows * right[static_cast<std::size_t>(v)];

  const Matrix<Scalar> bra_cols = stack_cols(bra);
  Environment<Scalar> out(static_cast<std::size_t>(wl));
  Matrix<Scalar> gathered(kl, d * br);
  for (Index w = 0; w < wl; ++w) {
    gathered.setZero();
    bool any = false;
    for (Index s = 0; s < d; ++s)
      for (Index t = 0; t < d; ++t) {
        const auto& wblock = op.block(i, s, t);
        for (Index v = 0; v < wr; ++v) {
          const Scalar c = wblock(w, v);
          if (c == Scalar(0)) continue;
          gathered.middleCols(s * br, br) += c * partial[static_cast<std::size_t>(v)].middleRows(t * kl, kl);
          any = true;
        }
      }
    if (any)
      out[static_cast<std::size_t>(w)].noalias() = gathered * bra_cols.adjoint();
    else
      out[static_cast<std::size_t>(w)] = Matrix<Scalar>::Zero(kl, bl);
  }
  return out;
}

/// Optimal bra tensor at site i given isometric surroundings, returned with
/// the d blocks stacked by rows.
template <typename Scalar>
Matrix<Scalar> local_projection(const Environment<Scalar>& left, const Mpo<Scalar>& op, Index i,
                                const std::vector<Matrix<Scalar>>& ket, const Environment<Scalar>& right) {
  const Index d = op.local_dim();
  const Index wl = static_cast<Index>(left.size());
  const Index wr = static_cast<Index>(right.size());
  const Index bl = left.front().rows();
  const Index br = right.front().cols();
  const Index kr = ket.front().cols();

  const Matrix<Scalar> ket_cols = stack_cols(ket);
  std::vector<Matrix<Scalar>> partial(static_cast<std::size_t>(wl));
  for (Index w = 0; w < wl; ++w) partial[static_cast<std::size_t>(w)].noalias() = left[static_cast<std::size_t>(w)] * ket_cols;

  Matrix<Scalar> result = Matrix<Scalar>::Zero(d * bl, br);
  Matrix<Scalar> gathered(d * bl, kr);
  for (Index v = 0; v < wr; ++v) {
    gathered.setZero();
    bool any = false;
    for (Index s = 0; s < d; ++s)
      for (Index t = 0; t < d; ++t) {
        const auto& wblock = op.block(i, s, t);
        for (Index w = 0; w < wl; ++w) {
          const Scalar c = wblock(w, v);
          if (c == Scalar(0)) continue;
          gathered.middleRows(s * bl, bl) += c * partial[static_cast<std::size_t>(w)].middleCols(t * kr, kr);
          any = true;
        }
      }
    if (any) result.noalias() += gathered * right[static_cast<std::size_t>(v)];
  }
  return result;
}

/// <bra|O|ket> over the raw tensors, ignoring log_norm.
template <typename Scalar>
Scalar raw_matrix_element(const std::vector<std::vector<Matrix<Scalar>>>& bra, const Mpo<Scalar>& op,
                          const std::vector<std::vector<Matrix<Scalar>>>& ket) {
  auto env = boundary_environment<Scalar>();
  for (std::size_t i = 0; i < ket.size(); ++i) env = update_left(env, bra[i], op, static_cast<Index>(i), ket[i]);
  return env.front()(0, 0);
}

template <typename Scalar>
Scalar raw_overlap(const std::vector<std::vector<Matrix<Scalar>>>& bra,
                   const std::vector<std::vector<Matrix<Scalar>>>& ket) {
  Matrix<Scalar> env = Matrix<Scalar>::Ones(1, 1);
  for (std::size_t i = 0; i < ket.size(); ++i) {
    Matrix<Scalar> next = Matrix<Scalar>::Zero(bra[i].front().cols(), ket[i].front().cols());
    for (std::size_t s = 0; s < ket[i].size(); ++s) next.noalias() += bra[i][s].adjoint() * (env * ket[i][s]);
    env = std::move(next);
  }
  return env(0, 0);
}

template <typename Scalar>
void require_matching(const Mpo<Scalar>& op, const Mps<Scalar>& state, const char* where) {
  if (op.size() != state.size() || op.local_dim() != state.local_dim())
    throw IncompatibleStates(std::string(where) + ": operator and state differ in length or local dimension");
}

}  // namespace detail

/// <bra|O|ket> including both log_norm scales.
template <typename Scalar>
Scalar matrix_element(const Mps<Scalar>& bra, const Mpo<Scalar>& op, const Mps<Scalar>& ket) {
  detail::require_matching(op, bra, "matrix_element");
  detail::require_matching(op, ket, "matrix_element");
  return detail::raw_matrix_element(bra.sites(), op, ket.sites()) * Scalar(std::exp(bra.log_norm() + ket.log_norm()));
}

/// <psi|O|psi> / <psi|psi>. For Hermitian-flagged operators the imaginary
/// part is checked and dropped.
template <typename Scalar>
Scalar expectation(const Mpo<Scalar>& op, const Mps<Scalar>& state) {
  detail::require_matching(op, state, "expectation");
  const Scalar numerator = detail::raw_matrix_element(state.sites(), op, state.sites());
  const double denominator = std::real(detail::raw_overlap(state.sites(), state.sites()));
  if (!(denominator > 0.0) || !std::isfinite(denominator)) throw NumericalFailure("expectation: state has no norm");
  const Scalar value = numerator / Scalar(denominator);
  if constexpr (is_complex_v<Scalar>) {
    if (op.hermitian()) {
      const double re = std::real(value), im = std::imag(value);
      if (std::abs(im) > 1e-6 * std::max(1.0, std::abs(re)))
        throw NumericalFailure("expectation: Hermitian operator has imaginary expectation");
      return Scalar(re, 0.0);
    }
  }
  return value;
}

template <typename Scalar>
double real_expectation(const Mpo<Scalar>& op, const Mps<Scalar>& state) {
  return static_cast<double>(std::real(expectation(op, state)));
}

}  // namespace rmps
