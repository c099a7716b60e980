#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pbgk/diagnostics.hpp"
#include "pbgk/model.hpp"

namespace pbgk {

// Scientific notation with 17 significant digits: enough to round-trip an
// IEEE double exactly, independent of any global locale ('.' decimal).
std::string format_number(double x);

// FNV-1a 64-bit hash over raw bytes, used to stamp outputs with their
// originating configuration.
std::uint64_t fnv1a_hash(std::string_view text);
std::string hash_hex(std::uint64_t h);

struct CsvColumn {
  std::string name;
  std::string unit;
};

// Streams one CSV file: '#'-prefixed metadata lines first, then a generated
// column-documentation block, the header row, and data rows. Identical rows
// always serialize to identical bytes.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<CsvColumn> columns);

  // Only valid before the first row; keys and values must not contain
  // newlines.
  void metadata(std::string_view key, std::string_view value);
  void append(const std::vector<double>& row);

  std::size_t rows_written() const { return rows_; }

 private:
  void write_header();

  std::ostream& out_;
  std::vector<CsvColumn> columns_;
  std::size_t rows_ = 0;
  bool header_written_ = false;
};

// Fixed column order for diagnostic time series: time, then per species
// [n, u components, internal-mean components, T_t, T_r, lambda, theta, T,
// S_f, S_M, S_Meq, h_f_Meq, h_M_Meq, D, l1_f_M, l1_f_Meq, clamp], then total
// momentum components, total energy, total mass, and the Lyapunov value.
std::vector<CsvColumn> diagnostic_columns(const ModelSetup& setup);
std::vector<double> diagnostic_row(const DiagnosticRecord& rec, const ModelSetup& setup);

struct CsvTable {
  std::map<std::string, std::string> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(std::string_view name) const;  // throws UnknownKey
  std::vector<double> column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

}  // namespace pbgk
