#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace agflow {

/// Numeric formatting for tabular output: 17 significant digits, enough to
/// round-trip any double bit-exactly.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using CsvCell = std::variant<std::string, double, std::int64_t>;

inline std::string csv_cell_to_string(const CsvCell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRId64, std::get<std::int64_t>(cell));
  return buf;
}

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<CsvCell> row) {
    if (row.size() != header_.size())
      throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t c = 0; c < header_.size(); ++c) {
      if (c) out += ',';
      out += header_[c];
    }
    out += '\n';
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += csv_cell_to_string(row[c]);
      }
      out += '\n';
    }
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!f) throw std::runtime_error("CsvTable: cannot open " + path);
    f << to_string();
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

}  // namespace agflow
