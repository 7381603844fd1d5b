#include "rmps/mps_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace rmps {
namespace {

constexpr std::array<char, 8> kMagic{'R', 'M', 'P', 'S', 'D', 'U', 'M', 'P'};
// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxExtent = std::uint64_t(1) << 24;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw InvalidParameter("read_mps: truncated input");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[static_cast<std::size_t>(i)];
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::uint64_t get_extent(std::istream& in, const char* what) {
  const auto v = get_u64(in);
  if (v == 0 || v > kMaxExtent) throw InvalidParameter(std::string("read_mps: bad ") + what);
  return v;
}

}  // namespace

void write_mps(std::ostream& out, const MpsC& state) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(state.size()));
  put_u64(out, static_cast<std::uint64_t>(state.local_dim()));
  for (Index b : state.bond_dims()) put_u64(out, static_cast<std::uint64_t>(b));
  put_f64(out, state.log_norm());
  put_u64(out, static_cast<std::uint64_t>(state.canonical()));
  for (const auto& site : state.sites())
    for (const auto& block : site)
      for (Index a = 0; a < block.rows(); ++a)
        for (Index b = 0; b < block.cols(); ++b) {
          put_f64(out, block(a, b).real());
          put_f64(out, block(a, b).imag());
        }
  if (!out) throw Error("write_mps: stream failure");
}

MpsC read_mps(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidParameter("read_mps: not an MPS dump");
  const auto n = get_extent(in, "site count");
  const auto d = get_extent(in, "local dimension");
  std::vector<Index> bonds;
  for (std::uint64_t i = 0; i <= n; ++i) bonds.push_back(static_cast<Index>(get_extent(in, "bond dimension")));
  const double log_norm = get_f64(in);
  const auto tag = get_u64(in);
  if (tag > 2) throw InvalidParameter("read_mps: bad canonical tag");
  std::vector<MpsC::SiteTensor> sites;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (static_cast<std::uint64_t>(bonds[i] * bonds[i + 1]) * d > kMaxExtent)
      throw InvalidParameter("read_mps: site tensor too large");
    MpsC::SiteTensor site;
    for (std::uint64_t s = 0; s < d; ++s) {
      Matrix<Complex> block(bonds[i], bonds[i + 1]);
      for (Index a = 0; a < block.rows(); ++a)
        for (Index b = 0; b < block.cols(); ++b) {
          const double re = get_f64(in);
          block(a, b) = Complex(re, get_f64(in));
        }
      site.push_back(std::move(block));
    }
    sites.push_back(std::move(site));
  }
  return MpsC(std::move(sites), log_norm, static_cast<Canonical>(tag));
}

void save_mps(const std::filesystem::path& path, const MpsC& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save_mps: cannot open " + path.string());
  write_mps(out, state);
}

MpsC load_mps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_mps: cannot open " + path.string());
  return read_mps(in);
}

}  // namespace rmps
