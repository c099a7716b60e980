#include "pbgk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pbgk/errors.hpp"

namespace pbgk {
namespace {

const char* axis_label(int a) {
  static const char* const xyz[] = {"x", "y", "z"};
  return a < 3 ? xyz[a] : nullptr;
}

std::string component_name(const std::string& base, int a, int d) {
  if (d <= 3) return base + axis_label(a);
  return base + std::to_string(a);
}

int internal_components(const ModelSetup& setup, std::size_t k) {
  if (setup.kind == ModelKind::alpp) return 0;
  return setup.species[k].internal_dof;
}

std::size_t model_species(const ModelSetup& setup) {
  return setup.kind == ModelKind::alpp ? 1 : setup.species.size();
}

}  // namespace

std::string format_number(double x) {
  // The process never calls setlocale, so the default "C" locale guarantees a
  // '.' decimal separator.
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.16e", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<CsvColumn> columns)
    : out_(out), columns_(std::move(columns)) {
  if (columns_.empty()) throw Error("csv writer needs at least one column");
  for (const CsvColumn& c : columns_)
    if (c.name.find_first_of(",\n#") != std::string::npos || c.name.empty())
      throw Error("csv column name invalid: '" + c.name + "'");
}

void CsvWriter::metadata(std::string_view key, std::string_view value) {
  if (header_written_) throw Error("csv metadata must precede data rows");
  if (key.find('\n') != std::string_view::npos || value.find('\n') != std::string_view::npos)
    throw Error("csv metadata must be single-line");
  out_ << "# " << key << " = " << value << '\n';
}

void CsvWriter::write_header() {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out_ << "# column " << i + 1 << ": " << columns_[i].name << " [" << columns_[i].unit
         << "]\n";
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out_ << (i ? "," : "") << columns_[i].name;
  out_ << '\n';
  header_written_ = true;
}

void CsvWriter::append(const std::vector<double>& row) {
  if (row.size() != columns_.size())
    throw Error("csv row width " + std::to_string(row.size()) + " != " +
                std::to_string(columns_.size()) + " columns");
  if (!header_written_) write_header();
  for (std::size_t i = 0; i < row.size(); ++i)
    out_ << (i ? "," : "") << format_number(row[i]);
  out_ << '\n';
  ++rows_;
}

std::vector<CsvColumn> diagnostic_columns(const ModelSetup& setup) {
  std::vector<CsvColumn> cols;
  cols.push_back({"time", "1/collision rate"});
  for (std::size_t k = 0; k < model_species(setup); ++k) {
    const std::string s = "_" + std::to_string(k + 1);
    cols.push_back({"n" + s, "number density"});
    for (int a = 0; a < setup.d; ++a)
      cols.push_back({component_name("u", a, setup.d) + s, "velocity"});
    for (int a = 0; a < internal_components(setup, k); ++a)
      cols.push_back({"e" + std::to_string(a + 1) + s, "internal mean"});
    cols.push_back({"Tt" + s, "temperature, translational"});
    cols.push_back({"Tr" + s, "temperature, internal"});
    cols.push_back({"lambda" + s, "temperature, velocity target"});
    cols.push_back({"theta" + s, "temperature, relaxation state"});
    cols.push_back({"T" + s, "temperature, equilibrium"});
    cols.push_back({"S_f" + s, "entropy of f"});
    cols.push_back({"S_M" + s, "entropy of per-species target"});
    cols.push_back({"S_Meq" + s, "entropy of local equilibrium"});
    cols.push_back({"h_f_Meq" + s, "relative entropy f vs equilibrium"});
    cols.push_back({"h_M_Meq" + s, "relative entropy target vs equilibrium"});
    cols.push_back({"D" + s, "entropy production"});
    cols.push_back({"l1_f_M" + s, "L1 distance f vs target"});
    cols.push_back({"l1_f_Meq" + s, "L1 distance f vs equilibrium"});
    cols.push_back({"clamp" + s, "entropy floor contribution bound"});
  }
  for (int a = 0; a < setup.d; ++a)
    cols.push_back({component_name("p", a, setup.d), "momentum density"});
  cols.push_back({"energy", "energy density"});
  cols.push_back({"mass", "mass density"});
  cols.push_back({"lyapunov", "composite Lyapunov value"});
  return cols;
}

std::vector<double> diagnostic_row(const DiagnosticRecord& rec, const ModelSetup& setup) {
  std::vector<double> row;
  row.push_back(rec.time);
  for (std::size_t k = 0; k < rec.sp.size(); ++k) {
    const SpeciesRecord& sr = rec.sp[k];
    row.push_back(sr.n);
    for (int a = 0; a < setup.d; ++a) row.push_back(sr.u.at(static_cast<std::size_t>(a)));
    const int nint = internal_components(setup, k);
    for (int a = 0; a < nint; ++a) row.push_back(sr.eta_bar.at(static_cast<std::size_t>(a)));
    row.push_back(sr.T_t);
    row.push_back(sr.T_r);
    row.push_back(sr.lambda);
    row.push_back(sr.theta);
    row.push_back(sr.T);
    row.push_back(sr.entropy_f);
    row.push_back(sr.entropy_M);
    row.push_back(sr.entropy_Meq);
    row.push_back(sr.h_f_Meq);
    row.push_back(sr.h_M_Meq);
    row.push_back(sr.production);
    row.push_back(sr.l1_f_M);
    row.push_back(sr.l1_f_Meq);
    row.push_back(sr.clamp_bound);
  }
  for (int a = 0; a < setup.d; ++a)
    row.push_back(rec.total_momentum.at(static_cast<std::size_t>(a)));
  row.push_back(rec.total_energy);
  row.push_back(rec.total_mass);
  row.push_back(rec.lyapunov);
  return row;
}

std::size_t CsvTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw UnknownKey(std::string(name));
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const std::size_t i = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const std::vector<double>& r : rows) out.push_back(r.at(i));
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Metadata form "# key = value"; column-documentation lines reuse it
      // with key "column <i>:".
      const std::size_t eq = line.find(" = ");
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        const std::size_t start = key.find_first_not_of(' ');
        key = start == std::string::npos ? "" : key.substr(start);
        t.metadata[key] = line.substr(eq + 3);
      }
      continue;
    }
    if (!header_seen) {
      std::stringstream ss(line);
      std::string name;
      while (std::getline(ss, name, ',')) t.columns.push_back(name);
      if (t.columns.empty()) throw ParseError("empty csv header", lineno);
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(t.columns.size());
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ParseError("bad csv number", lineno);
      row.push_back(v);
      p = next;
      if (p < end) {
        if (*p != ',') throw ParseError("expected comma", lineno);
        ++p;
      }
    }
    if (row.size() != t.columns.size()) throw ParseError("csv row width mismatch", lineno);
    t.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("csv file has no header", lineno);
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open csv file: " + path);
  return read_csv(in);
}

}  // namespace pbgk
