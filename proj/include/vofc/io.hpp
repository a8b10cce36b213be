#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vofc::io {

/// Rectangular table of numbers and short labels. Numbers are written with
/// 17 significant digits so they round-trip.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

std::string format_number(double v);

/// Writes to a temporary file next to `path` and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Reads a numeric CSV with a header row. Throws InvalidProblem on ragged or
/// non-numeric input.
struct NumericCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
  bool has(const std::string& name) const;
};

NumericCsv read_numeric_csv(const std::filesystem::path& path);

/// Resolves an output path: absolute or explicit paths are kept, a bare
/// default name goes under $VOFC_OUTPUT_DIR when that is set.
std::filesystem::path output_path(const std::string& requested, const std::string& default_name);

}  // namespace vofc::io
