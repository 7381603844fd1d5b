#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rmps/contraction.hpp"
#include "rmps/error.hpp"
#include "rmps/linalg.hpp"
#include "rmps/mpo.hpp"
#include "rmps/mps.hpp"

namespace rmps {

/// Full variational sweeps (one sweep = right-to-left plus left-to-right).
inline constexpr int kDefaultMaxSweeps = 8;
inline constexpr double kDefaultCompressTol = 1e-9;

template <typename Scalar>
struct CompressResult {
  Mps<Scalar> state;
  /// 1 - |<out|in>|^2 / (<out|out> <in|in>).
  double truncation_error = 0.0;
  int half_sweeps = 0;
};

struct ApplyOptions {
  int max_sweeps = kDefaultMaxSweeps;
  /// Evaluating the truncation error costs a <psi|O^dag O|psi> contraction.
  bool compute_error = true;
};

namespace detail {

template <typename Scalar>
using SiteList = std::vector<std::vector<Matrix<Scalar>>>;

/// Sequential truncation of O|ket>, formed site by site (zip-up). The ket
/// should be right-canonical so that the truncations see orthonormal right
/// blocks; for the identity operator this is the optimal sequential SVD
/// truncation. Returns left-canonical sites with the norm in the last site.
template <typename Scalar>
SiteList<Scalar> zip_up(const Mpo<Scalar>& op, const SiteList<Scalar>& ket, Index max_bond) {
  const Index d = op.local_dim();
  const Index n = static_cast<Index>(ket.size());
  SiteList<Scalar> out;
  out.reserve(ket.size());
  Environment<Scalar> carry = boundary_environment<Scalar>();
  for (Index i = 0; i < n; ++i) {
    const auto& k = ket[static_cast<std::size_t>(i)];
    const Index kr = k.front().cols();
    const Index rows = carry.front().rows();
    const Index wl = static_cast<Index>(carry.size());
    const Index wr = op.block(i, 0, 0).cols();

    const Matrix<Scalar> ket_cols = stack_cols(k);
    std::vector<Matrix<Scalar>> partial(static_cast<std::size_t>(wl));
    for (Index w = 0; w < wl; ++w) partial[static_cast<std::size_t>(w)].noalias() = carry[static_cast<std::size_t>(w)] * ket_cols;

    Matrix<Scalar> theta = Matrix<Scalar>::Zero(d * rows, wr * kr);
    for (Index s = 0; s < d; ++s)
      for (Index t = 0; t < d; ++t) {
        const auto& wblock = op.block(i, s, t);
        for (Index w = 0; w < wl; ++w)
          for (Index v = 0; v < wr; ++v) {
            const Scalar c = wblock(w, v);
            if (c == Scalar(0)) continue;
            theta.block(s * rows, v * kr, rows, kr) += c * partial[static_cast<std::size_t>(w)].middleCols(t * kr, kr);
          }
      }

    if (i == n - 1) {
      out.push_back(split_rows(theta, d));
      break;
    }
    auto [isometry, rest] = dominant_range(theta, max_bond);
    out.push_back(split_rows(isometry, d));
    Environment<Scalar> next(static_cast<std::size_t>(wr));
    for (Index v = 0; v < wr; ++v) next[static_cast<std::size_t>(v)] = rest.middleCols(v * kr, kr);
    carry = std::move(next);
  }
  return out;
}

template <typename Scalar>
struct FitOutcome {
  SiteList<Scalar> sites;
  double center_norm = 0.0;
  Canonical form = Canonical::none;
  int half_sweeps = 0;
};

/// Single-site variational fit of a bra to O|ket>. The guess must be
/// left-canonical with its center on the last site. Alternating half-sweeps
/// run until the relative change of the squared overlap drops below tol.
/// max_sweeps = 0 returns the guess untouched.
template <typename Scalar>
FitOutcome<Scalar> variational_fit(const Mpo<Scalar>& op, const SiteList<Scalar>& ket, SiteList<Scalar> guess,
                                   double tol, int max_sweeps) {
  const Index d = op.local_dim();
  const std::size_t n = ket.size();
  if (max_sweeps <= 0) {
    FitOutcome<Scalar> plain;
    plain.center_norm = frobenius_norm(guess.back());
    plain.form = Canonical::left;
    plain.sites = std::move(guess);
    return plain;
  }
  std::vector<Environment<Scalar>> left(n + 1), right(n + 1);
  left[0] = boundary_environment<Scalar>();
  right[n] = boundary_environment<Scalar>();
  for (std::size_t i = 0; i + 1 < n; ++i) left[i + 1] = update_left(left[i], guess[i], op, static_cast<Index>(i), ket[i]);

  FitOutcome<Scalar> outcome;
  double previous = -1.0;
  bool right_to_left = true;
  const int max_half_sweeps = 2 * max_sweeps;
  for (int half = 0; half < max_half_sweeps; ++half) {
    Matrix<Scalar> center;
    if (right_to_left) {
      for (std::size_t i = n; i-- > 0;) {
        center = local_projection(left[i], op, static_cast<Index>(i), ket[i], right[i + 1]);
        if (i == 0) break;
        const Matrix<Scalar> wide = stack_cols(split_rows(center, d));
        auto [q, r] = thin_qr(Matrix<Scalar>(wide.adjoint()));
        guess[i] = split_cols(Matrix<Scalar>(q.adjoint()), d);
        right[i] = update_right(right[i + 1], guess[i], op, static_cast<Index>(i), ket[i]);
      }
      guess[0] = split_rows(center, d);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        center = local_projection(left[i], op, static_cast<Index>(i), ket[i], right[i + 1]);
        if (i + 1 == n) break;
        auto [q, r] = thin_qr(center);
        guess[i] = split_rows(q, d);
        left[i + 1] = update_left(left[i], guess[i], op, static_cast<Index>(i), ket[i]);
      }
      guess[n - 1] = split_rows(center, d);
    }
    outcome.half_sweeps = half + 1;
    outcome.form = right_to_left ? Canonical::right : Canonical::left;
    const double overlap = center.squaredNorm();
    if (!std::isfinite(overlap)) throw NumericalFailure("variational_fit: non-finite tensor entries");
    outcome.center_norm = std::sqrt(overlap);
    if (previous >= 0.0 && std::abs(overlap - previous) <= tol * std::max(overlap, std::numeric_limits<double>::min()))
      break;
    previous = overlap;
    right_to_left = !right_to_left;
  }
  outcome.sites = std::move(guess);
  return outcome;
}

template <typename Scalar>
Mps<Scalar> finish_fit(FitOutcome<Scalar> fit, double log_norm, const char* where) {
  require_finite_norm(fit.center_norm, where);
  const std::size_t center = fit.form == Canonical::right ? 0 : fit.sites.size() - 1;
  for (auto& b : fit.sites[center]) b /= Scalar(fit.center_norm);
  return Mps<Scalar>(std::move(fit.sites), log_norm + std::log(fit.center_norm), fit.form);
}

}  // namespace detail

/// Compresses a state to bond dimension max_bond: sequential SVD truncation
/// from a right-canonical form, then single-site variational sweeps against
/// the input until the overlap changes by less than tol (or the sweep cap).
template <typename Scalar>
CompressResult<Scalar> compress(const Mps<Scalar>& state, Index max_bond, double tol = kDefaultCompressTol,
                                int max_sweeps = kDefaultMaxSweeps) {
  if (max_bond < 1) throw InvalidParameter("compress: target bond dimension must be >= 1");
  const Mps<Scalar> ket = canonicalize(state, Canonical::right);
  const auto identity = identity_mpo<Scalar>(ket.size(), ket.local_dim());
  auto guess = detail::zip_up(identity, ket.sites(), max_bond);
  auto fit = detail::variational_fit(identity, ket.sites(), std::move(guess), tol, max_sweeps);
  CompressResult<Scalar> result;
  result.half_sweeps = fit.half_sweeps;
  // The ket tensors have unit norm, so the center norm is the fidelity amplitude.
  result.truncation_error = std::max(0.0, 1.0 - fit.center_norm * fit.center_norm);
  result.state = detail::finish_fit(std::move(fit), ket.log_norm(), "compress");
  return result;
}

/// Exact MPO-MPS product with bond dimension chi * chi_W (bond index
/// (w, a) -> w * chi + a).
template <typename Scalar>
Mps<Scalar> apply_exact(const Mpo<Scalar>& op, const Mps<Scalar>& state) {
  detail::require_matching(op, state, "apply_exact");
  const Index d = op.local_dim();
  std::vector<typename Mps<Scalar>::SiteTensor> sites;
  sites.reserve(static_cast<std::size_t>(state.size()));
  for (Index i = 0; i < state.size(); ++i) {
    typename Mps<Scalar>::SiteTensor site;
    for (Index s = 0; s < d; ++s) {
      Matrix<Scalar> block = Matrix<Scalar>::Zero(op.block(i, 0, 0).rows() * state.block(i, 0).rows(),
                                                  op.block(i, 0, 0).cols() * state.block(i, 0).cols());
      for (Index t = 0; t < d; ++t) block += detail::kron(op.block(i, s, t), state.block(i, t));
      site.push_back(std::move(block));
    }
    sites.push_back(std::move(site));
  }
  return Mps<Scalar>(std::move(sites), state.log_norm(), Canonical::none);
}

template <typename Scalar>
struct ApplyResult {
  /// Unit-norm tensors; log_norm carries the norm of O|state>.
  Mps<Scalar> state;
  /// Absent when not requested.
  std::optional<double> truncation_error;
  int half_sweeps = 0;
};

/// Compressed O|state>. Equivalent to compress(apply_exact(op, state)), but
/// the chi * chi_W intermediate is only ever formed one site at a time
/// (zip-up) and the variational sweeps contract against O and the input
/// directly.
template <typename Scalar>
ApplyResult<Scalar> apply(const Mpo<Scalar>& op, const Mps<Scalar>& state, Index max_bond,
                          double tol = kDefaultCompressTol, const ApplyOptions& options = {},
                          const Mpo<Scalar>* op_dagger_op = nullptr) {
  detail::require_matching(op, state, "apply");
  if (max_bond < 1) throw InvalidParameter("apply: target bond dimension must be >= 1");
  const Mps<Scalar> ket = canonicalize(state, Canonical::right);
  auto guess = detail::zip_up(op, ket.sites(), max_bond);
  auto fit = detail::variational_fit(op, ket.sites(), std::move(guess), tol, options.max_sweeps);

  ApplyResult<Scalar> result;
  result.half_sweeps = fit.half_sweeps;
  if (options.compute_error) {
    const double kept = fit.center_norm * fit.center_norm;
    double full = 0.0;
    if (op_dagger_op != nullptr) {
      full = std::real(detail::raw_matrix_element(ket.sites(), *op_dagger_op, ket.sites()));
    } else {
      const auto squared = mpo_product(adjoint(op), op);
      full = std::real(detail::raw_matrix_element(ket.sites(), squared, ket.sites()));
    }
    result.truncation_error = full > 0.0 ? std::max(0.0, 1.0 - kept / full) : 0.0;
  }
  result.state = detail::finish_fit(std::move(fit), ket.log_norm(), "apply");
  return result;
}

}  // namespace rmps
