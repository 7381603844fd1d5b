#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rmps/compress.hpp"
#include "rmps/error.hpp"
#include "rmps/model.hpp"
#include "rmps/mpo.hpp"

namespace rmps {

/// How sigma is chosen when not given explicitly.
///   bound:       norm_bound(model) + |E|, guarantees 0 <= G <= 1
///   paper:       2 N delta + |E| with delta = max(|J|, |field|)
///   paper_coeff: same with delta = max(|J|/4, |field|) for Heisenberg
enum class SigmaMode { bound, paper, paper_coeff, fixed };

inline SigmaMode parse_sigma_mode(std::string_view name) {
  if (name == "bound" || name == "auto") return SigmaMode::bound;
  if (name == "paper") return SigmaMode::paper;
  if (name == "paper-coeff" || name == "paper_coeff") return SigmaMode::paper_coeff;
  if (name == "fixed") return SigmaMode::fixed;
  throw InvalidParameter("unknown sigma mode '" + std::string(name) + "'");
}

inline std::string to_string(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::bound:
      return "bound";
    case SigmaMode::paper:
      return "paper";
    case SigmaMode::paper_coeff:
      return "paper-coeff";
    case SigmaMode::fixed:
      return "fixed";
  }
  return "bound";
}

inline double resolve_sigma(const SpinModel& model, double energy, SigmaMode mode, std::optional<double> value = {}) {
  const double n = static_cast<double>(model.sites);
  switch (mode) {
    case SigmaMode::fixed:
      if (!value) throw InvalidParameter("sigma mode 'fixed' needs a value");
      return *value;
    case SigmaMode::bound:
      return norm_bound(model) + std::abs(energy);
    case SigmaMode::paper:
      return 2.0 * n * std::max(std::abs(model.coupling), std::abs(model.field)) + std::abs(energy);
    case SigmaMode::paper_coeff: {
      const double j = model.kind == ModelKind::heisenberg ? std::abs(model.coupling) / 4.0 : std::abs(model.coupling);
      return 2.0 * n * std::max(j, std::abs(model.field)) + std::abs(energy);
    }
  }
  return norm_bound(model) + std::abs(energy);
}

/// G = a I + b H + c H^2 = I - ((H - E) / sigma)^2.
struct FilterCoefficients {
  double a, b, c;
};

inline FilterCoefficients filter_coefficients(double energy, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidParameter("filter: sigma must be positive");
  const double s2 = sigma * sigma;
  return {1.0 - energy * energy / s2, 2.0 * energy / s2, -1.0 / s2};
}

template <typename Scalar>
struct FilterOperator {
  SpinModel model;
  double energy = 0.0;
  double sigma = 1.0;
  Mpo<Scalar> h;
  Mpo<Scalar> h_squared;
  Mpo<Scalar> g;
  /// G^dag G, only needed for truncation errors.
  Mpo<Scalar> g_squared;
  /// False when sigma is below the rigorous bound on ||H - E||, in which
  /// case G may have negative eigenvalues.
  bool positivity_guaranteed = true;
  std::vector<std::string> warnings;
};

inline constexpr Index kHeisenbergSquareBond = 9;

template <typename Scalar>
FilterOperator<Scalar> build_filter(const SpinModel& model, double energy, double sigma, double tol = 1e-12) {
  const auto coeff = filter_coefficients(energy, sigma);
  FilterOperator<Scalar> f;
  f.model = model;
  f.energy = energy;
  f.sigma = sigma;
  f.h = hamiltonian_mpo<Scalar>(model);
  f.h_squared = mpo_square(f.h, tol);
  if (model.kind == ModelKind::heisenberg && f.h_squared.max_bond() > kHeisenbergSquareBond)
    f.warnings.push_back("H^2 operator bond " + std::to_string(f.h_squared.max_bond()) + " exceeds " +
                         std::to_string(kHeisenbergSquareBond));
  const auto identity = identity_mpo<Scalar>(model.sites, 2);
  f.g = compress_mpo(mpo_sum<Scalar>({{Scalar(coeff.a), identity}, {Scalar(coeff.b), f.h}, {Scalar(coeff.c), f.h_squared}}),
                     tol);
  f.g.set_hermitian(true);
  f.g_squared = compress_mpo(mpo_product(f.g, f.g), tol);
  f.g_squared.set_hermitian(true);
  const double needed = norm_bound(model) + std::abs(energy);
  if (sigma < needed) {
    f.positivity_guaranteed = false;
    f.warnings.push_back("sigma " + std::to_string(sigma) + " is below the spectral bound " + std::to_string(needed) +
                         "; G is not guaranteed positive");
  }
  return f;
}

}  // namespace rmps
