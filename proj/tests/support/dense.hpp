#pragma once

// Independent dense constructions used as test oracles. Nothing here goes
// through the MPO builders.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rmps/model.hpp"

namespace testing_dense {

using Cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat pauli(char which) {
  Mat m = Mat::Zero(2, 2);
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, Cd(0, -1), Cd(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Operator string with the given single-site factors, identity elsewhere.
inline Mat site_product(int n, const std::vector<std::pair<int, char>>& factors) {
  Mat out = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    char which = 'i';
    for (const auto& [site, p] : factors)
      if (site == i) which = p;
    out = kron(out, pauli(which));
  }
  return out;
}

inline Mat hamiltonian(const rmps::SpinModel& m) {
  const int n = static_cast<int>(m.sites);
  const Eigen::Index dim = Eigen::Index(1) << n;
  Mat h = Mat::Zero(dim, dim);
  for (int i = 0; i + 1 < n; ++i) {
    if (m.kind == rmps::ModelKind::heisenberg) {
      for (char a : {'x', 'y', 'z'}) h -= (m.coupling / 4.0) * site_product(n, {{i, a}, {i + 1, a}});
    } else {
      h -= m.coupling * site_product(n, {{i, 'z'}, {i + 1, 'z'}});
    }
  }
  for (int i = 0; i < n; ++i) h -= m.field * site_product(n, {{i, m.kind == rmps::ModelKind::heisenberg ? 'z' : 'x'}});
  return h;
}

}  // namespace testing_dense
