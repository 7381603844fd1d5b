#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rmps/ensemble.hpp"

namespace rmps {

/// Shortest decimal that round-trips; "nan", "inf", "-inf" otherwise.
std::string format_double(double value);

/// Accumulates comma-separated rows with a header; fields are numbers or
/// plain identifiers, so no quoting is done.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<std::string>& cells);
  std::string str() const;
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

CsvTable trace_table(const EnsembleResult& result);
CsvTable histogram_table(const EnsembleResult& result);
CsvTable fits_table(const std::vector<CheckpointFit>& fits);
CsvTable curve_table(const std::vector<CurvePoint>& curve);
CsvTable correlation_table(const std::vector<CorrelationPoint>& profile);

struct HistogramEntry {
  int k = 0;
  std::uint64_t sample_index = 0;
  double energy = 0.0;
};

std::vector<HistogramEntry> read_histogram(const std::filesystem::path& path);

/// Gaussian fits per checkpoint from histogram rows, in ascending k.
/// Checkpoints with a single entry get a zero-variance fit.
std::vector<CheckpointFit> fits_from_histogram(const std::vector<HistogramEntry>& entries);

/// Structured metadata for a run; `extra` is merged in at top level.
std::string run_metadata_json(const EnsembleResult& result, const std::string& command, const std::string& extra_json = "");

}  // namespace rmps
