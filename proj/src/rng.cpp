#include "rmps/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace rmps {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Gamma selection from java.util.SplittableRandom: odd, with enough bit
// transitions that the Weyl sequence is well mixed.
std::uint64_t mix_gamma(std::uint64_t z) noexcept {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  const int transitions = std::popcount(z ^ (z >> 1));
  return transitions < 24 ? z ^ 0xaaaaaaaaaaaaaaaaULL : z;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
    : master_seed_(master_seed), stream_id_(stream_id), gamma_(mix_gamma(stream_id ^ kGolden)) {}

double RngStream::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index) noexcept {
  // mix64 is bijective and index -> base + (index + 1) * golden is injective
  // modulo 2^64, so distinct indices give distinct stream ids.
  const std::uint64_t base = mix64(master_seed);
  return RngStream(master_seed, mix64(base + (sample_index + 1) * kGolden));
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t salt) noexcept {
  return mix64(mix64(master_seed ^ 0x6a09e667f3bcc909ULL) + (salt + 1) * 0xbb67ae8584caa73bULL);
}

}  // namespace rmps
