#include "vofc/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "vofc/error.hpp"

namespace vofc::io {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) fail(ErrorKind::InvalidProblem, "CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string format_number(double v) {
  if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, "refusing to write a non-finite CSV entry");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::InvalidConfig, "cannot write " + tmp.string());
    os << contents;
    os.flush();
    if (!os) fail(ErrorKind::InvalidConfig, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail(ErrorKind::InvalidConfig, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

const std::vector<double>& NumericCsv::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  fail(ErrorKind::InvalidProblem, "CSV has no column '" + name + "'");
}

bool NumericCsv::has(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

NumericCsv read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::InvalidProblem, "cannot open " + path.string());
  NumericCsv csv;
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::InvalidProblem, path.string() + " is empty");
  csv.header = split(line);
  csv.columns.resize(csv.header.size());
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != csv.header.size())
      fail(ErrorKind::InvalidProblem, path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0' || errno == ERANGE)
        fail(ErrorKind::InvalidProblem,
             path.string() + ":" + std::to_string(lineno) + ": '" + cells[i] + "' is not a number");
      csv.columns[i].push_back(v);
    }
  }
  return csv;
}

std::filesystem::path output_path(const std::string& requested, const std::string& default_name) {
  if (!requested.empty()) return requested;
  if (const char* dir = std::getenv("VOFC_OUTPUT_DIR"); dir && *dir) return std::filesystem::path(dir) / default_name;
  return default_name;
}

}  // namespace vofc::io
