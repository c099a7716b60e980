#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "pbgk/csv.hpp"
#include "pbgk/errors.hpp"

namespace {

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

double parse_back(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(ec == std::errc());
  REQUIRE(p == s.data() + s.size());
  return v;
}

}  // namespace

TEST_CASE("number formatting round-trips doubles bit for bit") {
  const std::vector<double> samples = {
      0.0,
      -0.0,
      1.0,
      -1.0 / 3.0,
      M_PI,
      6.02214076e23,
      1e-300,
      5e-324,                     // smallest denormal
      2.2250738585072014e-308,    // smallest normal
      1.7976931348623157e308,     // largest finite
  };
  for (double x : samples) {
    const std::string s = pbgk::format_number(x);
    CAPTURE(s);
    CHECK(bits(parse_back(s)) == bits(x));
  }
  CHECK(pbgk::format_number(1.0) == "1.0000000000000000e+00");
  CHECK(pbgk::format_number(-0.5) == "-5.0000000000000000e-01");
}

TEST_CASE("configuration hash matches the published reference vectors") {
  CHECK(pbgk::fnv1a_hash("") == 14695981039346656037ull);
  CHECK(pbgk::fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
  CHECK(pbgk::fnv1a_hash("ab") == 0x089c4407b545986aull);
  CHECK(pbgk::fnv1a_hash("foobar") == 0x85944171f73967e8ull);
  CHECK(pbgk::hash_hex(pbgk::fnv1a_hash("a")) == "af63dc4c8601ec8c");
  CHECK(pbgk::hash_hex(0) == "0000000000000000");
}

TEST_CASE("csv writer layout and determinism") {
  const std::vector<pbgk::CsvColumn> cols = {{"t", "s"}, {"x", "m"}};
  const std::vector<double> r1 = {0.5, -1.0 / 3.0};
  const std::vector<double> r2 = {1.5, 1e-300};

  auto emit = [&]() {
    std::ostringstream out;
    pbgk::CsvWriter w(out, cols);
    w.metadata("model", "demo");
    w.metadata("config_hash", "cafe");
    w.append(r1);
    w.append(r2);
    CHECK(w.rows_written() == 2);
    return out.str();
  };

  const std::string text = emit();
  const std::string expected = std::string("# model = demo\n") +
                               "# config_hash = cafe\n" +
                               "# column 1: t [s]\n" +
                               "# column 2: x [m]\n" +
                               "t,x\n" +
                               pbgk::format_number(r1[0]) + "," + pbgk::format_number(r1[1]) +
                               "\n" +
                               pbgk::format_number(r2[0]) + "," + pbgk::format_number(r2[1]) +
                               "\n";
  CHECK(text == expected);
  CHECK(emit() == text);

  SUBCASE("metadata after the first row is rejected") {
    std::ostringstream out;
    pbgk::CsvWriter w(out, cols);
    w.append(r1);
    CHECK_THROWS_AS(w.metadata("late", "no"), pbgk::Error);
  }

  SUBCASE("row width must match the column count") {
    std::ostringstream out;
    pbgk::CsvWriter w(out, cols);
    CHECK_THROWS_AS(w.append({1.0}), pbgk::Error);
  }

  SUBCASE("column names must be comma- and comment-free") {
    std::ostringstream out;
    CHECK_THROWS_AS(pbgk::CsvWriter(out, {{"a,b", ""}}), pbgk::Error);
    CHECK_THROWS_AS(pbgk::CsvWriter(out, {{"", ""}}), pbgk::Error);
    CHECK_THROWS_AS(pbgk::CsvWriter(out, {}), pbgk::Error);
  }
}

TEST_CASE("csv reader inverts the writer exactly") {
  const std::vector<pbgk::CsvColumn> cols = {{"t", "s"}, {"x", "m"}, {"y", ""}};
  const std::vector<std::vector<double>> rows = {
      {0.0, -0.0, 5e-324},
      {1.0 / 3.0, 6.02214076e23, -1e-300},
      {2.0, 1.7976931348623157e308, -2.5},
  };

  std::ostringstream out;
  pbgk::CsvWriter w(out, cols);
  w.metadata("model", "demo");
  w.metadata("config_hash", "00ff");
  for (const auto& r : rows) w.append(r);

  std::istringstream in(out.str());
  const pbgk::CsvTable t = pbgk::read_csv(in);
  CHECK(t.metadata.size() == 2);
  CHECK(t.metadata.at("model") == "demo");
  CHECK(t.metadata.at("config_hash") == "00ff");
  REQUIRE(t.columns == std::vector<std::string>{"t", "x", "y"});
  REQUIRE(t.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(bits(t.rows[i][j]) == bits(rows[i][j]));
    }

  CHECK(t.column_index("y") == 2);
  CHECK(t.column("x")[1] == 6.02214076e23);
  CHECK_THROWS_AS((void)t.column_index("missing"), pbgk::UnknownKey);
}

TEST_CASE("csv reader reports malformed input with line numbers") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return pbgk::read_csv(in);
  };

  SUBCASE("corrupt number") {
    try {
      (void)read("a,b\n1.0,oops\n");
      FAIL("expected a parse error");
    } catch (const pbgk::ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("missing separator") {
    try {
      (void)read("a,b\n1.0 2.0\n");
      FAIL("expected a parse error");
    } catch (const pbgk::ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("short row") {
    try {
      (void)read("a,b\n1.0,2.0\n3.0\n");
      FAIL("expected a parse error");
    } catch (const pbgk::ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  SUBCASE("missing header") {
    CHECK_THROWS_AS((void)read(""), pbgk::ParseError);
    CHECK_THROWS_AS((void)read("# only = metadata\n"), pbgk::ParseError);
  }

  SUBCASE("blank lines and comments are ignored") {
    const pbgk::CsvTable t = read("# k = v\n\na,b\n\n1.0,2.0\n\n");
    CHECK(t.rows.size() == 1);
    CHECK(t.columns.size() == 2);
  }
}

TEST_CASE("diagnostic table layout covers every record field") {
  pbgk::ModelSetup setup;
  setup.kind = pbgk::ModelKind::new_mix;
  setup.species.resize(2);
  setup.species[0].internal_dof = 1;
  setup.species[0].slots = {0};
  setup.species[1].internal_dof = 1;
  setup.species[1].slots = {0};

  const std::vector<pbgk::CsvColumn> cols = pbgk::diagnostic_columns(setup);
  // 1 time + 2 * (1 + 3 + 1 + 5 + 9) + 3 momentum + energy + mass + lyapunov.
  CHECK(cols.size() == 45);
  CHECK(cols.front().name == "time");
  CHECK(cols[1].name == "n_1");
  CHECK(cols[2].name == "ux_1");
  CHECK(cols[5].name == "e1_1");
  CHECK(cols.back().name == "lyapunov");

  pbgk::DiagnosticRecord rec;
  rec.time = 2.5;
  rec.total_momentum = {0.1, 0.2, 0.3};
  rec.total_energy = 4.0;
  rec.total_mass = 5.0;
  rec.lyapunov = -6.0;
  for (int k = 0; k < 2; ++k) {
    pbgk::SpeciesRecord sr;
    sr.n = 1.0 + k;
    sr.u = {0.01, 0.02, 0.03};
    sr.eta_bar = {0.04};
    rec.sp.push_back(sr);
  }
  const std::vector<double> row = pbgk::diagnostic_row(rec, setup);
  REQUIRE(row.size() == cols.size());
  CHECK(row[0] == 2.5);
  CHECK(row[1] == 1.0);
  CHECK(row.back() == -6.0);

  SUBCASE("scalar-energy layout has one species and no internal-mean column") {
    pbgk::ModelSetup alpp;
    alpp.kind = pbgk::ModelKind::alpp;
    alpp.species.resize(1);
    const std::vector<pbgk::CsvColumn> acols = pbgk::diagnostic_columns(alpp);
    CHECK(acols.size() == 25);

    pbgk::DiagnosticRecord arec;
    arec.total_momentum = {0.0, 0.0, 0.0};
    pbgk::SpeciesRecord sr;
    sr.u = {0.0, 0.0, 0.0};
    arec.sp.push_back(sr);
    CHECK(pbgk::diagnostic_row(arec, alpp).size() == acols.size());
  }
}
