#include "rmps/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>
#include <unistd.h>

#include "rmps/version.hpp"

namespace rmps {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buffer;
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buffer.data(), end);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw InvalidParameter("CsvTable: empty header");
  row(header);
  rows_ = 0;
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw InvalidParameter("CsvTable: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
  ++rows_;
  return *this;
}

std::string CsvTable::str() const { return text_; }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

CsvTable trace_table(const EnsembleResult& result) {
  CsvTable t({"sample_index", "k", "energy", "energy_variance", "truncation_error"});
  for (const auto& s : result.samples) {
    if (s.failed) continue;
    for (const auto& r : s.trace.records)
      t.row({std::to_string(s.sample_index), std::to_string(r.k), format_double(r.energy),
             format_double(r.energy_variance), format_double(r.truncation_error)});
  }
  return t;
}

CsvTable histogram_table(const EnsembleResult& result) {
  CsvTable t({"checkpoint_k", "sample_index", "energy"});
  for (int k : result.config.resolved_checkpoints())
    for (const auto& s : result.samples) {
      if (s.failed) continue;
      for (const auto& r : s.trace.records)
        if (r.k == k) t.row({std::to_string(k), std::to_string(s.sample_index), format_double(r.energy)});
    }
  return t;
}

CsvTable fits_table(const std::vector<CheckpointFit>& fits) {
  CsvTable t({"checkpoint_k", "mean", "variance", "stderr_mean", "ks_statistic", "sample_count"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& f : fits) {
    // A single sample has no spread to report.
    const bool single = f.energy.sample_count < 2;
    t.row({std::to_string(f.k), format_double(f.energy.mean), format_double(single ? nan : f.energy.variance),
           format_double(single ? nan : f.energy.standard_error_mean), format_double(single ? nan : f.energy.ks_statistic),
           std::to_string(f.energy.sample_count)});
  }
  return t;
}

namespace {

std::string stderr_cell(const Estimate& e) {
  return e.standard_error ? format_double(*e.standard_error) : std::string("nan");
}

}  // namespace

CsvTable curve_table(const std::vector<CurvePoint>& curve) {
  CsvTable t({"h", "m_z", "stderr"});
  for (const auto& p : curve) t.row({format_double(p.h), format_double(p.m_z.mean), stderr_cell(p.m_z)});
  return t;
}

CsvTable correlation_table(const std::vector<CorrelationPoint>& profile) {
  CsvTable t({"j", "phi", "stderr"});
  for (const auto& p : profile) t.row({std::to_string(p.j), format_double(p.phi.mean), stderr_cell(p.phi)});
  return t;
}

std::vector<HistogramEntry> read_histogram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "checkpoint_k,sample_index,energy")
    throw InvalidParameter(path.string() + ": not a histogram file (bad header)");
  std::vector<HistogramEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string k, idx, energy;
    if (!std::getline(fields, k, ',') || !std::getline(fields, idx, ',') || !std::getline(fields, energy))
      throw InvalidParameter(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
    HistogramEntry e;
    auto parse = [&](const std::string& text, auto& out) {
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
      if (ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidParameter(path.string() + ":" + std::to_string(line_no) + ": bad number '" + text + "'");
    };
    parse(k, e.k);
    parse(idx, e.sample_index);
    parse(energy, e.energy);
    entries.push_back(e);
  }
  return entries;
}

std::vector<CheckpointFit> fits_from_histogram(const std::vector<HistogramEntry>& entries) {
  std::map<int, std::vector<double>> by_k;
  for (const auto& e : entries) by_k[e.k].push_back(e.energy);
  std::vector<CheckpointFit> fits;
  for (const auto& [k, energies] : by_k) {
    CheckpointFit f;
    f.k = k;
    if (energies.size() >= 2) {
      f.energy = fit_gaussian(energies);
    } else {
      f.energy.mean = energies.front();
      f.energy.sample_count = 1;
    }
    fits.push_back(f);
  }
  return fits;
}

std::string run_metadata_json(const EnsembleResult& result, const std::string& command, const std::string& extra_json) {
  using nlohmann::json;
  const auto& c = result.config;
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["model"] = {{"kind", to_string(c.model.kind)},
                {"N", c.model.sites},
                {"J", c.model.coupling},
                {c.model.kind == ModelKind::heisenberg ? "h" : "g", c.model.field}};
  json sampler = {{"chi", c.chi},
                  {"E", result.energy},
                  {"u", result.energy / static_cast<double>(c.model.sites)},
                  {"energy_given_as", c.energy ? "E" : "u"},
                  {"iterations", c.iterations},
                  {"samples", c.samples},
                  {"compress_tol", c.compress_tol},
                  {"max_sweeps", c.max_sweeps},
                  {"record_every", c.record_every},
                  {"checkpoints", c.resolved_checkpoints()},
                  {"track_truncation", c.track_truncation}};
  j["sampler"] = sampler;
  j["seed"] = c.seed;
  j["sigma"] = {{"value", result.sigma},
                {"mode", to_string(c.sigma_mode)},
                {"positivity_guaranteed", result.positivity_guaranteed},
                {"norm_bound", norm_bound(c.model)}};
  j["warnings"] = result.warnings;
  j["failed_samples"] = result.failed;
  json failures = json::array();
  for (const auto& s : result.samples)
    if (s.failed) failures.push_back({{"sample_index", s.sample_index}, {"reason", s.failure}});
  j["failures"] = failures;
  if (!result.fits.empty()) {
    const auto& last = result.fits.back();
    const double k = std::max(1, last.k);
    j["variance_model"] = {
        {"checkpoint_k", last.k},
        {"measured_mean_state_variance", last.variance.mean},
        {"sigma2_over_4k", result.sigma * result.sigma / (4.0 * k)},
        {"four_sigma2_over_k", 4.0 * result.sigma * result.sigma / k},
        {"note", "the Gaussian weight exp[-2k((E_i-E)/sigma)^2] implies sigma^2/(4k); 4 sigma^2/k is the alternative constant"}};
  }
  j["wall_seconds"] = result.wall_seconds;
  if (!extra_json.empty()) j.update(json::parse(extra_json));
  return j.dump(2) + "\n";
}

}  // namespace rmps
