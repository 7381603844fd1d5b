#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/QR>

#include "rmps/error.hpp"
#include "rmps/types.hpp"

namespace rmps {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream in the SplittableRandom family: draw n of a stream is
/// mix64(stream_id + n * gamma), with a per-stream odd gamma. Streams are
/// plain values; the only state is the draw counter.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(stream_id_ + counter_ * gamma_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Platform-stable given a conforming libm,
  /// unlike std::normal_distribution whose algorithm is unspecified.
  double normal() noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t gamma_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Stream for one sample. Injective in sample_index for a fixed seed.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index) noexcept;

/// Seed for a sub-run (e.g. one grid point of a sweep) derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt) noexcept;

/// Ginibre entry: real and imaginary parts independent N(0, 1/2). Real
/// scalars draw a plain N(0, 1).
template <typename Scalar>
Scalar gaussian_scalar(RngStream& stream) {
  if constexpr (is_complex_v<Scalar>) {
    using Real = typename Scalar::value_type;
    const Real re = static_cast<Real>(stream.normal() / std::numbers::sqrt2);
    const Real im = static_cast<Real>(stream.normal() / std::numbers::sqrt2);
    return Scalar(re, im);
  } else {
    return static_cast<Scalar>(stream.normal());
  }
}

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(RngStream& stream, Index rows, Index cols) {
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = gaussian_scalar<Scalar>(stream);
  return m;
}

/// Haar-distributed unitary (orthogonal for real Scalar): QR of a Ginibre
/// matrix with the phases of diag(R) divided out of Q.
template <typename Scalar>
Matrix<Scalar> haar_unitary(RngStream& stream, Index dim) {
  if (dim <= 0) throw InvalidDimension("haar_unitary: dimension must be positive");
  const Matrix<Scalar> z = gaussian_matrix<Scalar>(stream, dim, dim);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(z);
  Matrix<Scalar> q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    const auto rjj = r(j, j);
    const auto mag = std::abs(rjj);
    if (mag > 0) q.col(j) *= rjj / mag;
  }
  return q;
}

template <typename Scalar>
Vector<Scalar> haar_unit_vector(RngStream& stream, Index dim) {
  if (dim <= 0) throw InvalidDimension("haar_unit_vector: dimension must be positive");
  Vector<Scalar> v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = gaussian_scalar<Scalar>(stream);
  const auto n = v.norm();
  if (!(n > 0)) return haar_unit_vector<Scalar>(stream, dim);
  return v / n;
}

}  // namespace rmps
