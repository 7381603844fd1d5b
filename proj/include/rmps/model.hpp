#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "rmps/error.hpp"
#include "rmps/mpo.hpp"

namespace rmps {

enum class ModelKind { heisenberg, transverse_ising };

/// Open spin-1/2 chain.
///   heisenberg:       H = -sum_{i<N} (J/4) s_i.s_{i+1} - h sum_i sz_i
///   transverse_ising: H = -J sum_{i<N} sz_i sz_{i+1} - g sum_i sx_i
/// with Pauli matrices s. `field` is h or g depending on the kind.
struct SpinModel {
  ModelKind kind = ModelKind::heisenberg;
  Index sites = 2;
  double coupling = 1.0;
  double field = 0.0;

  void validate() const {
    if (sites < 2) throw InvalidParameter("SpinModel: need at least 2 sites");
    if (!std::isfinite(coupling) || !std::isfinite(field)) throw InvalidParameter("SpinModel: non-finite parameter");
  }
};

inline std::string to_string(ModelKind kind) {
  return kind == ModelKind::heisenberg ? "heisenberg" : "transverse_ising";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "heisenberg") return ModelKind::heisenberg;
  if (name == "transverse_ising" || name == "ising" || name == "tfi") return ModelKind::transverse_ising;
  throw InvalidParameter("unknown model kind '" + std::string(name) + "'");
}

/// Triangle-inequality bound on the operator norm of H.
inline double norm_bound(const SpinModel& model) {
  const auto bonds = static_cast<double>(model.sites - 1);
  const auto n = static_cast<double>(model.sites);
  if (model.kind == ModelKind::heisenberg) return bonds * 0.75 * std::abs(model.coupling) + n * std::abs(model.field);
  return bonds * std::abs(model.coupling) + n * std::abs(model.field);
}

namespace pauli {

// Basis index 0 is spin up (sz = +1).
template <typename Scalar>
Matrix<Scalar> identity() {
  return Matrix<Scalar>::Identity(2, 2);
}
template <typename Scalar>
Matrix<Scalar> z() {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(2, 2);
  m(0, 0) = Scalar(1);
  m(1, 1) = Scalar(-1);
  return m;
}
template <typename Scalar>
Matrix<Scalar> x() {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(2, 2);
  m(0, 1) = m(1, 0) = Scalar(1);
  return m;
}
/// sigma^+ = (x + i y) / 2 = |up><down|.
template <typename Scalar>
Matrix<Scalar> raise() {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(2, 2);
  m(0, 1) = Scalar(1);
  return m;
}
template <typename Scalar>
Matrix<Scalar> lower() {
  Matrix<Scalar> m = Matrix<Scalar>::Zero(2, 2);
  m(1, 0) = Scalar(1);
  return m;
}

}  // namespace pauli

namespace detail {

/// Assembles an MPO from a bulk transition table: bulk[w][v] is the 2x2
/// operator carried from bond state w to v. The left boundary is row 0 and
/// the right boundary is column bond-1.
template <typename Scalar>
Mpo<Scalar> finite_state_mpo(Index sites, const std::vector<std::vector<Matrix<Scalar>>>& bulk) {
  const Index d = 2;
  const Index bond = static_cast<Index>(bulk.size());
  std::vector<typename Mpo<Scalar>::SiteTensor> tensors;
  for (Index i = 0; i < sites; ++i) {
    const Index rows = i == 0 ? 1 : bond;
    const Index cols = i == sites - 1 ? 1 : bond;
    typename Mpo<Scalar>::SiteTensor site(static_cast<std::size_t>(d * d), Matrix<Scalar>::Zero(rows, cols));
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) {
        const Index w = i == 0 ? 0 : r;
        const Index v = i == sites - 1 ? bond - 1 : c;
        const auto& op = bulk[static_cast<std::size_t>(w)][static_cast<std::size_t>(v)];
        if (op.size() == 0) continue;
        for (Index s = 0; s < d; ++s)
          for (Index t = 0; t < d; ++t) site[static_cast<std::size_t>(s * d + t)](r, c) = op(s, t);
      }
    tensors.push_back(std::move(site));
  }
  return Mpo<Scalar>(std::move(tensors), d, true);
}

}  // namespace detail

/// Hamiltonian MPO: bond 5 for Heisenberg (sigma^+/- form), 3 for the
/// transverse Ising chain.
template <typename Scalar>
Mpo<Scalar> hamiltonian_mpo(const SpinModel& model) {
  model.validate();
  using M = Matrix<Scalar>;
  const Scalar j(model.coupling), f(model.field);
  if (model.kind == ModelKind::heisenberg) {
    // xx + yy = 2 (s+ s- + s- s+)
    std::vector<std::vector<M>> t(5, std::vector<M>(5));
    t[0][0] = pauli::identity<Scalar>();
    t[0][1] = pauli::raise<Scalar>();
    t[0][2] = pauli::lower<Scalar>();
    t[0][3] = pauli::z<Scalar>();
    t[0][4] = -f * pauli::z<Scalar>();
    t[1][4] = -(j / Scalar(2)) * pauli::lower<Scalar>();
    t[2][4] = -(j / Scalar(2)) * pauli::raise<Scalar>();
    t[3][4] = -(j / Scalar(4)) * pauli::z<Scalar>();
    t[4][4] = pauli::identity<Scalar>();
    return detail::finite_state_mpo<Scalar>(model.sites, t);
  }
  std::vector<std::vector<M>> t(3, std::vector<M>(3));
  t[0][0] = pauli::identity<Scalar>();
  t[0][1] = pauli::z<Scalar>();
  t[0][2] = -f * pauli::x<Scalar>();
  t[1][2] = -j * pauli::z<Scalar>();
  t[2][2] = pauli::identity<Scalar>();
  return detail::finite_state_mpo<Scalar>(model.sites, t);
}

/// H * H, compressed in operator space with relative singular-value threshold tol.
template <typename Scalar>
Mpo<Scalar> mpo_square(const Mpo<Scalar>& h, double tol = 1e-12) {
  auto squared = compress_mpo(mpo_product(h, h), tol);
  squared.set_hermitian(h.hermitian());
  return squared;
}

}  // namespace rmps
