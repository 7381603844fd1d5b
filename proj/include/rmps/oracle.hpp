#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "rmps/model.hpp"
#include "rmps/types.hpp"

namespace rmps {

inline constexpr Index kDenseCap = Index(1) << 14;

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Hamiltonian in the computational basis, assembled directly from the bond
/// terms. Basis index bit N-1-i is site i (site 0 most significant), a set
/// bit meaning spin down.
SparseMatrix dense_hamiltonian(const SpinModel& model, Index cap = kDenseCap);

struct DenseSpectrum {
  SpinModel model;
  /// Ascending.
  Eigen::VectorXd eigenvalues;
  /// Columns are eigenvectors.
  Eigen::MatrixXd eigenvectors;
};

/// Full eigendecomposition. Heisenberg chains are diagonalized per
/// magnetization sector.
DenseSpectrum diagonalize(const SpinModel& model, Index cap = kDenseCap);

/// |<E_i|psi>|^2 for every eigenstate.
Eigen::VectorXd populations(const Vector<Complex>& state, const DenseSpectrum& spectrum);

/// Eigenstate-resolved diagonal <E_i|O|E_i> of an observable that is diagonal
/// in the computational basis.
Eigen::VectorXd eigenstate_values(const DenseSpectrum& spectrum, const Eigen::VectorXd& diagonal);
Eigen::VectorXd eigenstate_values(const DenseSpectrum& spectrum, const Eigen::MatrixXcd& observable);

/// log of w_i = [1 - ((E_i - E)/sigma)^2]^{2k}, the exact G^{2k} weights.
Eigen::VectorXd log_filter_weights(const DenseSpectrum& spectrum, double energy, double sigma, int k);

/// Tr(O W) / Tr(W) with W = sum_i w_i |E_i><E_i|. Throws DegenerateWindow if
/// every weight underflows 1e-300.
double filtered_average(const DenseSpectrum& spectrum, double energy, double sigma, int k,
                        const Eigen::VectorXd& diagonal_observable);
double filtered_average(const DenseSpectrum& spectrum, double energy, double sigma, int k,
                        const Eigen::MatrixXcd& observable);

/// Energy variance of the W-weighted spectral distribution.
double filtered_energy_variance(const DenseSpectrum& spectrum, double energy, double sigma, int k);

/// Tr(O e^{-H/T}) / Tr(e^{-H/T}), shifted by the ground energy.
double canonical_average(const DenseSpectrum& spectrum, double temperature, const Eigen::VectorXd& diagonal_observable);
double canonical_average(const DenseSpectrum& spectrum, double temperature, const Eigen::MatrixXcd& observable);

/// Temperature whose canonical energy equals `energy`, by bisection in log T
/// over [1e-3, 1e3]. Throws InvalidParameter outside that range.
double matching_temperature(const DenseSpectrum& spectrum, double energy);

/// Diagonal of sum_i sz_i / N.
Eigen::VectorXd magnetization_diagonal(Index sites);
/// Diagonal of sum_i sz_i sz_{i+j} / (N - j).
Eigen::VectorXd zz_diagonal(Index sites, Index distance);

struct DenseReplay {
  /// <H> and <H^2> - <H>^2 after steps 1..k_max.
  std::vector<double> energies;
  std::vector<double> variances;
  Vector<Complex> final_state;
};

/// Exact normalized power iteration psi <- G psi / ||G psi|| with sparse H.
DenseReplay dense_power_replay(const Vector<Complex>& initial, const SpinModel& model, double energy, double sigma,
                               int k_max);

}  // namespace rmps
