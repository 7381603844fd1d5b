#include "rmps/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "rmps/error.hpp"

namespace rmps {
namespace {

Index checked_dimension(Index sites, Index cap) {
  if (sites < 2) throw InvalidParameter("oracle: need at least 2 sites");
  if (sites >= 62 || (Index(1) << sites) > cap)
    throw TooLarge("oracle: 2^" + std::to_string(sites) + " exceeds the dense cap " + std::to_string(cap));
  return Index(1) << sites;
}

// sz of site i in basis state x.
double sz(std::uint64_t x, Index sites, Index i) { return (x >> (sites - 1 - i)) & 1U ? -1.0 : 1.0; }

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& log_w) {
  const double top = log_w.maxCoeff();
  if (!(top > std::log(1e-300))) throw DegenerateWindow("filtered_average: every filter weight underflows");
  return (log_w.array() - top).exp();
}

double weighted_mean(const Eigen::VectorXd& w, const Eigen::VectorXd& values) { return w.dot(values) / w.sum(); }

}  // namespace

SparseMatrix dense_hamiltonian(const SpinModel& model, Index cap) {
  model.validate();
  const Index n = model.sites;
  const Index dim = checked_dimension(n, cap);
  std::vector<Eigen::Triplet<double>> entries;
  const double j = model.coupling, f = model.field;
  for (Index x = 0; x < dim; ++x) {
    const auto ux = static_cast<std::uint64_t>(x);
    double diag = 0.0;
    for (Index i = 0; i + 1 < n; ++i) {
      const double zz = sz(ux, n, i) * sz(ux, n, i + 1);
      if (model.kind == ModelKind::heisenberg) {
        diag -= j / 4.0 * zz;
        // xx + yy maps |ud> <-> |du> with amplitude 2.
        if (zz < 0.0) {
          const std::uint64_t mask = (std::uint64_t(1) << (n - 1 - i)) | (std::uint64_t(1) << (n - 2 - i));
          entries.emplace_back(static_cast<Index>(ux ^ mask), x, -j / 2.0);
        }
      } else {
        diag -= j * zz;
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (model.kind == ModelKind::heisenberg)
        diag -= f * sz(ux, n, i);
      else
        entries.emplace_back(static_cast<Index>(ux ^ (std::uint64_t(1) << (n - 1 - i))), x, -f);
    }
    entries.emplace_back(x, x, diag);
  }
  SparseMatrix h(dim, dim);
  h.setFromTriplets(entries.begin(), entries.end());
  return h;
}

DenseSpectrum diagonalize(const SpinModel& model, Index cap) {
  const SparseMatrix h = dense_hamiltonian(model, cap);
  const Index dim = h.rows();
  DenseSpectrum spectrum;
  spectrum.model = model;
  Eigen::VectorXd values(dim);
  Eigen::MatrixXd vectors = Eigen::MatrixXd::Zero(dim, dim);

  // Heisenberg conserves the number of down spins; everything else gets one block.
  std::vector<std::vector<Index>> sectors;
  if (model.kind == ModelKind::heisenberg) {
    sectors.resize(static_cast<std::size_t>(model.sites + 1));
    for (Index x = 0; x < dim; ++x) sectors[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(x)))].push_back(x);
  } else {
    sectors.emplace_back(static_cast<std::size_t>(dim));
    std::iota(sectors.front().begin(), sectors.front().end(), Index(0));
  }

  const Eigen::MatrixXd full = model.kind == ModelKind::heisenberg ? Eigen::MatrixXd() : Eigen::MatrixXd(h);
  Index column = 0;
  for (const auto& basis : sectors) {
    const Index m = static_cast<Index>(basis.size());
    Eigen::MatrixXd block(m, m);
    if (model.kind == ModelKind::heisenberg) {
      std::vector<Index> position(static_cast<std::size_t>(dim), -1);
      for (Index a = 0; a < m; ++a) position[static_cast<std::size_t>(basis[static_cast<std::size_t>(a)])] = a;
      block.setZero();
      for (Index a = 0; a < m; ++a)
        for (SparseMatrix::InnerIterator it(h, basis[static_cast<std::size_t>(a)]); it; ++it)
          block(position[static_cast<std::size_t>(it.row())], a) = it.value();
    } else {
      block = full;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success) throw NumericalFailure("diagonalize: eigensolver failed");
    for (Index c = 0; c < m; ++c) {
      values(column + c) = es.eigenvalues()(c);
      for (Index a = 0; a < m; ++a) vectors(basis[static_cast<std::size_t>(a)], column + c) = es.eigenvectors()(a, c);
    }
    column += m;
  }

  std::vector<Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) < values(b); });
  spectrum.eigenvalues.resize(dim);
  spectrum.eigenvectors.resize(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    spectrum.eigenvalues(c) = values(order[static_cast<std::size_t>(c)]);
    spectrum.eigenvectors.col(c) = vectors.col(order[static_cast<std::size_t>(c)]);
  }
  return spectrum;
}

Eigen::VectorXd populations(const Vector<Complex>& state, const DenseSpectrum& spectrum) {
  if (state.size() != spectrum.eigenvectors.rows()) throw IncompatibleStates("populations: dimension mismatch");
  const Vector<Complex> amplitudes = spectrum.eigenvectors.cast<Complex>().adjoint() * state;
  return amplitudes.cwiseAbs2();
}

Eigen::VectorXd eigenstate_values(const DenseSpectrum& spectrum, const Eigen::VectorXd& diagonal) {
  if (diagonal.size() != spectrum.eigenvectors.rows()) throw IncompatibleStates("oracle: observable dimension mismatch");
  return spectrum.eigenvectors.cwiseAbs2().transpose() * diagonal;
}

Eigen::VectorXd eigenstate_values(const DenseSpectrum& spectrum, const Eigen::MatrixXcd& observable) {
  const auto& v = spectrum.eigenvectors;
  if (observable.rows() != v.rows() || observable.cols() != v.rows())
    throw IncompatibleStates("oracle: observable dimension mismatch");
  const Eigen::MatrixXcd ov = observable * v.cast<Complex>();
  return (v.cast<Complex>().conjugate().cwiseProduct(ov)).colwise().sum().real().transpose();
}

Eigen::VectorXd log_filter_weights(const DenseSpectrum& spectrum, double energy, double sigma, int k) {
  if (!(sigma > 0.0)) throw InvalidParameter("filter weights: sigma must be positive");
  if (k < 0) throw InvalidParameter("filter weights: k must be >= 0");
  const Eigen::ArrayXd x = (spectrum.eigenvalues.array() - energy) / sigma;
  if (k == 0) return Eigen::VectorXd::Zero(x.size());
  return (2.0 * k) * (1.0 - x.square()).abs().log();
}

double filtered_average(const DenseSpectrum& spectrum, double energy, double sigma, int k,
                        const Eigen::VectorXd& diagonal_observable) {
  const auto w = normalized_weights(log_filter_weights(spectrum, energy, sigma, k));
  return weighted_mean(w, eigenstate_values(spectrum, diagonal_observable));
}

double filtered_average(const DenseSpectrum& spectrum, double energy, double sigma, int k,
                        const Eigen::MatrixXcd& observable) {
  const auto w = normalized_weights(log_filter_weights(spectrum, energy, sigma, k));
  return weighted_mean(w, eigenstate_values(spectrum, observable));
}

double filtered_energy_variance(const DenseSpectrum& spectrum, double energy, double sigma, int k) {
  const auto w = normalized_weights(log_filter_weights(spectrum, energy, sigma, k));
  const double mean = weighted_mean(w, spectrum.eigenvalues);
  const Eigen::VectorXd centered = (spectrum.eigenvalues.array() - mean).square();
  return weighted_mean(w, centered);
}

double canonical_average(const DenseSpectrum& spectrum, double temperature, const Eigen::VectorXd& diagonal_observable) {
  if (!(temperature > 0.0)) throw InvalidParameter("canonical_average: temperature must be positive");
  const Eigen::VectorXd w = (-(spectrum.eigenvalues.array() - spectrum.eigenvalues(0)) / temperature).exp();
  return weighted_mean(w, eigenstate_values(spectrum, diagonal_observable));
}

double canonical_average(const DenseSpectrum& spectrum, double temperature, const Eigen::MatrixXcd& observable) {
  if (!(temperature > 0.0)) throw InvalidParameter("canonical_average: temperature must be positive");
  const Eigen::VectorXd w = (-(spectrum.eigenvalues.array() - spectrum.eigenvalues(0)) / temperature).exp();
  return weighted_mean(w, eigenstate_values(spectrum, observable));
}

double matching_temperature(const DenseSpectrum& spectrum, double energy) {
  const Eigen::VectorXd& e = spectrum.eigenvalues;
  auto canonical_energy = [&](double t) {
    const Eigen::VectorXd w = (-(e.array() - e(0)) / t).exp();
    return w.dot(e) / w.sum();
  };
  double lo = 1e-3, hi = 1e3;
  if (!(energy > canonical_energy(lo) && energy < canonical_energy(hi)))
    throw InvalidParameter("matching_temperature: energy " + std::to_string(energy) +
                           " has no positive temperature in [1e-3, 1e3]");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (canonical_energy(mid) < energy ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

Eigen::VectorXd magnetization_diagonal(Index sites) {
  const Index dim = checked_dimension(sites, Index(1) << 30);
  Eigen::VectorXd out(dim);
  for (Index x = 0; x < dim; ++x) {
    const int down = std::popcount(static_cast<std::uint64_t>(x));
    out(x) = static_cast<double>(sites - 2 * down) / static_cast<double>(sites);
  }
  return out;
}

Eigen::VectorXd zz_diagonal(Index sites, Index distance) {
  if (distance < 1 || distance >= sites) throw InvalidParameter("zz_diagonal: distance out of range");
  const Index dim = checked_dimension(sites, Index(1) << 30);
  Eigen::VectorXd out(dim);
  for (Index x = 0; x < dim; ++x) {
    double total = 0.0;
    for (Index i = 0; i + distance < sites; ++i)
      total += sz(static_cast<std::uint64_t>(x), sites, i) * sz(static_cast<std::uint64_t>(x), sites, i + distance);
    out(x) = total / static_cast<double>(sites - distance);
  }
  return out;
}

DenseReplay dense_power_replay(const Vector<Complex>& initial, const SpinModel& model, double energy, double sigma,
                               int k_max) {
  if (!(sigma > 0.0)) throw InvalidParameter("dense_power_replay: sigma must be positive");
  const Eigen::SparseMatrix<Complex> h = dense_hamiltonian(model).cast<Complex>();
  if (initial.size() != h.rows()) throw IncompatibleStates("dense_power_replay: dimension mismatch");
  DenseReplay out;
  Vector<Complex> psi = initial.normalized();
  for (int k = 1; k <= k_max; ++k) {
    const Vector<Complex> shifted = (h * psi - energy * psi) / sigma;
    const Vector<Complex> shifted2 = (h * shifted - energy * shifted) / sigma;
    psi = (psi - shifted2).eval();
    psi.normalize();
    const Vector<Complex> hpsi = h * psi;
    const double e = psi.dot(hpsi).real();
    out.energies.push_back(e);
    out.variances.push_back(hpsi.squaredNorm() - e * e);
  }
  out.final_state = std::move(psi);
  return out;
}

}  // namespace rmps
