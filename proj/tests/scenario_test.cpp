#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pbgk/csv.hpp"
#include "pbgk/errors.hpp"
#include "pbgk/macro.hpp"
#include "pbgk/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_dir(const std::string& leaf) {
  const std::string dir = "scenario_test_out/" + leaf;
  std::filesystem::remove_all(dir);
  return dir;
}

// Two-species single-attractor mixture on a deliberately coarse grid: the
// runtime tests below only exercise plumbing, not quadrature accuracy.
std::string tiny_mixture_json() {
  return R"json({
  "scenario": "tiny_mix",
  "model": "new_mix",
  "frequency_law": "density_weighted",
  "species": [
    {"mass": 1.0, "internal_dof": 1, "slots": [0], "nu_self": 1.0, "nu_cross": 0.5, "z": 1.2},
    {"mass": 1.5, "internal_dof": 1, "slots": [0], "nu_self": 1.1, "nu_cross": 0.4, "z": 0.9}
  ],
  "mixture": {"delta": 0.5, "beta": 0.5, "alpha": 0.5, "gamma": 0.0, "gamma_tilde": 0.0},
  "grid": {"velocity_points": 8, "internal_points": 6, "sigma_span": 6.0, "temp_cap": 1.3},
  "initial": [
    {"kind": "perturbed", "n": 1.0, "u": [0.2, 0.0, 0.0], "eta_bar": [0.1],
     "lambda": 1.2, "theta": 0.8, "theta0": 0.9, "amplitude": 0.1},
    {"kind": "maxwellian", "n": 0.8, "u": [-0.1, 0.05, 0.0], "eta_bar": [-0.05],
     "lambda": 0.9, "theta": 1.1}
  ],
  "run": {"t_end": 0.2, "stride": 2},
  "seed": 99,
  "checks": ["ck_bound"]
})json";
}

}  // namespace

TEST_CASE("builtin scenario library round-trips through the config format") {
  const std::vector<std::string> names = pbgk::builtin_scenario_names();
  const std::vector<std::string> expected = {"conservation_kpp_mixture",
                                             "conservation_new_mixture",
                                             "equilibrium_two_species",
                                             "htheorem_z01",
                                             "htheorem_z1",
                                             "htheorem_z10",
                                             "envelope_new_mixture",
                                             "regimes_slow",
                                             "regimes_fast",
                                             "alpp_rate_theta025",
                                             "alpp_rate_theta1",
                                             "oracle_check_alpp",
                                             "oracle_check_kpp_one",
                                             "oracle_check_bip_one",
                                             "oracle_check_kpp_mixture",
                                             "oracle_check_new_mixture",
                                             "exchange_identities",
                                             "lemma_sweep"};
  CHECK(names == expected);

  for (const std::string& name : names) {
    CAPTURE(name);
    const pbgk::ScenarioConfig cfg = pbgk::builtin_scenario(name);
    CHECK(cfg.name == name);
    CHECK(!cfg.checks.empty());

    // emit -> parse -> emit is a string fixed point, and the hash follows it.
    const std::string text = pbgk::emit_config(cfg);
    const pbgk::ScenarioConfig back = pbgk::parse_config(text);
    CHECK(pbgk::emit_config(back) == text);
    CHECK(pbgk::config_hash(back) == pbgk::config_hash(cfg));
  }

  CHECK_THROWS_AS((void)pbgk::builtin_scenario("no_such_scenario"), pbgk::UnknownKey);
}

TEST_CASE("config parser fills documented defaults") {
  const pbgk::ScenarioConfig cfg = pbgk::parse_config(R"({"model": "kpp_one"})");
  CHECK(cfg.name == "custom");
  CHECK(cfg.setup.kind == pbgk::ModelKind::kpp_one);
  CHECK(cfg.setup.d == 3);
  REQUIRE(cfg.setup.species.size() == 1);
  CHECK(cfg.setup.species[0].internal_dof == 2);
  CHECK(cfg.setup.species[0].mass == 1.0);
  CHECK(cfg.setup.species[0].nu_cross == 0.0);
  REQUIRE(cfg.init.size() == 1);
  CHECK(cfg.init[0].kind == "maxwellian");
  CHECK(cfg.init[0].main.n == 1.0);
  CHECK(cfg.init[0].main.u == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(cfg.init[0].main.eta_bar == std::vector<double>{0.0, 0.0});
  CHECK(cfg.init[0].main.lambda == 1.0);
  CHECK(cfg.init[0].main.theta == 1.0);
  CHECK(cfg.init[0].theta0 == -1.0);
  CHECK(cfg.grid.velocity_points == 24);
  CHECK(cfg.grid.internal_points == 16);
  CHECK(cfg.seed == 1);
  CHECK(cfg.A_bound == 1.0);
  CHECK(cfg.B_bound == 1.0);
  CHECK(cfg.checks.empty());

  // Mixtures default to two coupled species.
  const pbgk::ScenarioConfig mix = pbgk::parse_config(R"({"model": "new_mix"})");
  REQUIRE(mix.setup.species.size() == 2);
  CHECK(mix.setup.species[0].nu_cross == 0.5);
  CHECK(mix.setup.species[1].nu_cross == 0.5);
}

TEST_CASE("config parser rejects malformed and inadmissible input") {
  SUBCASE("missing model") {
    CHECK_THROWS_AS((void)pbgk::parse_config("{}"), pbgk::ParseError);
  }
  SUBCASE("unknown top-level key") {
    CHECK_THROWS_AS((void)pbgk::parse_config(R"({"model": "kpp_one", "bogus": 1})"),
                    pbgk::UnknownKey);
  }
  SUBCASE("unknown check name") {
    CHECK_THROWS_AS(
        (void)pbgk::parse_config(R"({"model": "kpp_one", "checks": ["no_such_check"]})"),
        pbgk::UnknownKey);
  }
  SUBCASE("wrong species count") {
    CHECK_THROWS_AS(
        (void)pbgk::parse_config(R"({"model": "new_mix", "species": [{"mass": 1.0}]})"),
        pbgk::ParseError);
  }
  SUBCASE("inadmissible mixture weight") {
    try {
      (void)pbgk::parse_config(R"({"model": "new_mix", "mixture": {"delta": 1.5}})");
      FAIL("expected ConstraintViolated");
    } catch (const pbgk::ConstraintViolated& e) {
      bool found = false;
      for (const std::string& n : e.names())
        if (n == "delta_range") found = true;
      CHECK_MESSAGE(found, e.what());
    }
  }
  SUBCASE("inadmissible frequency bounds") {
    try {
      (void)pbgk::parse_config(R"({"model": "kpp_one", "bounds": {"A": 0.5, "B": 1.0}})");
      FAIL("expected ConstraintViolated");
    } catch (const pbgk::ConstraintViolated& e) {
      CHECK(e.names() == std::vector<std::string>{"frequency_bounds"});
    }
  }
  SUBCASE("syntax error carries the line number") {
    try {
      (void)pbgk::parse_config("{\n  \"model\": \"kpp_one\",\n  oops\n}");
      FAIL("expected ParseError");
    } catch (const pbgk::ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("bimaxwellian requires a secondary shape") {
    CHECK_THROWS_AS((void)pbgk::parse_config(
                        R"({"model": "kpp_one", "initial": [{"kind": "bimaxwellian"}]})"),
                    pbgk::ParseError);
  }
  SUBCASE("secondary shape only valid for bimaxwellian") {
    CHECK_THROWS_AS(
        (void)pbgk::parse_config(
            R"({"model": "kpp_one",
                "initial": [{"kind": "maxwellian", "secondary": {"n": 1.0}}]})"),
        pbgk::ParseError);
  }
  SUBCASE("unknown key inside a secondary shape") {
    CHECK_THROWS_AS(
        (void)pbgk::parse_config(
            R"({"model": "kpp_one",
                "initial": [{"kind": "bimaxwellian", "secondary": {"n": 1.0, "kind": "x"}}]})"),
        pbgk::UnknownKey);
  }
  SUBCASE("nonpositive initial temperature") {
    try {
      (void)pbgk::parse_config(
          R"({"model": "kpp_one", "initial": [{"kind": "maxwellian", "lambda": -1.0}]})");
      FAIL("expected ConstraintViolated");
    } catch (const pbgk::ConstraintViolated& e) {
      CHECK(e.names() == std::vector<std::string>{"initial_temperature_positive"});
    }
  }
}

TEST_CASE("identical config and seed produce byte-identical output") {
  const pbgk::ScenarioConfig cfg = pbgk::parse_config(tiny_mixture_json());
  const std::string dir_a = fresh_dir("run_a");
  const std::string dir_b = fresh_dir("run_b");

  const pbgk::ScenarioResult r1 = pbgk::run_scenario(cfg, dir_a);
  const pbgk::ScenarioResult r2 = pbgk::run_scenario(cfg, dir_b);

  CHECK(!r1.aborted);
  CHECK(r1.exit_code() == 0);
  CHECK(r1.all_passed());
  CHECK(r1.hash == r2.hash);
  REQUIRE(!r1.records.empty());
  CHECK(r1.records.size() == r2.records.size());

  // Records start at t = 0, advance monotonically, and end at t_end.
  CHECK(r1.records.front().time == 0.0);
  for (std::size_t i = 1; i < r1.records.size(); ++i)
    CHECK(r1.records[i].time > r1.records[i - 1].time);
  CHECK(r1.records.back().time == doctest::Approx(0.2).epsilon(1e-9));

  const std::string csv_a = slurp(r1.csv_path);
  const std::string csv_b = slurp(r2.csv_path);
  CHECK(csv_a == csv_b);
  CHECK(std::filesystem::exists(r1.summary_path));

  // The emitted table parses back with one row per record and carries the
  // config hash in its metadata.
  std::istringstream ss(csv_a);
  const pbgk::CsvTable table = pbgk::read_csv(ss);
  CHECK(table.rows.size() == r1.records.size());
  CHECK(table.metadata.at("config_hash") == pbgk::hash_hex(r1.hash));
  CHECK(table.metadata.at("scenario") == "tiny_mix");
  const std::vector<double> times = table.column("time");
  REQUIRE(times.size() == r1.records.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(times[i] == r1.records[i].time);
}

TEST_CASE("run overrides replace the configured horizon") {
  const pbgk::ScenarioConfig cfg = pbgk::parse_config(tiny_mixture_json());
  pbgk::RunOverrides ov;
  ov.t_end = 0.0;
  const pbgk::ScenarioResult res = pbgk::run_scenario(cfg, fresh_dir("t0"), ov);
  CHECK(!res.aborted);
  CHECK(res.steps == 0);
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].time == 0.0);
}

TEST_CASE("joint equilibrium initial data stays put") {
  // Both species share the mean velocity, internal mean, and temperature, and
  // theta starts at that same temperature: every collision target coincides
  // with the state itself, so all recorded moments must stay constant.
  const pbgk::ScenarioConfig cfg = pbgk::parse_config(R"json({
    "scenario": "flat",
    "model": "new_mix",
    "species": [
      {"mass": 1.0, "internal_dof": 1, "slots": [0], "nu_self": 1.0, "nu_cross": 0.5, "z": 1.2},
      {"mass": 1.5, "internal_dof": 1, "slots": [0], "nu_self": 1.1, "nu_cross": 0.4, "z": 0.9}
    ],
    "mixture": {"delta": 0.5, "beta": 0.5, "alpha": 0.5, "gamma": 0.0, "gamma_tilde": 0.0},
    "grid": {"velocity_points": 20, "internal_points": 20},
    "initial": [
      {"kind": "maxwellian", "n": 1.0, "u": [0.1, 0.0, 0.0], "eta_bar": [0.15],
       "lambda": 0.95, "theta": 0.95},
      {"kind": "maxwellian", "n": 0.8, "u": [0.1, 0.0, 0.0], "eta_bar": [0.15],
       "lambda": 0.95, "theta": 0.95}
    ],
    "run": {"t_end": 0.5, "stride": 5},
    "seed": 3
  })json");

  const pbgk::ScenarioResult res = pbgk::run_scenario(cfg, fresh_dir("flat"));
  REQUIRE(!res.aborted);
  REQUIRE(res.records.size() >= 2);
  const pbgk::DiagnosticRecord& first = res.records.front();
  for (const pbgk::DiagnosticRecord& rec : res.records) {
    for (std::size_t k = 0; k < rec.sp.size(); ++k) {
      CHECK(rec.sp[k].n == doctest::Approx(first.sp[k].n).epsilon(1e-9));
      CHECK(rec.sp[k].T_t == doctest::Approx(first.sp[k].T_t).epsilon(1e-9));
      CHECK(rec.sp[k].T_r == doctest::Approx(first.sp[k].T_r).epsilon(1e-9));
      CHECK(rec.sp[k].theta == doctest::Approx(first.sp[k].theta).epsilon(1e-9));
      CHECK(rec.sp[k].u[0] == doctest::Approx(first.sp[k].u[0]).epsilon(1e-9));
    }
    CHECK(rec.lyapunov == doctest::Approx(first.lyapunov).epsilon(1e-9));
  }
}

TEST_CASE("initial-state construction matches the configured shapes") {
  SUBCASE("bimaxwellian mass adds up and theta0 overrides the shape") {
    const pbgk::ScenarioConfig cfg = pbgk::parse_config(R"json({
      "model": "new_mix",
      "species": [
        {"mass": 1.0, "internal_dof": 1, "slots": [0], "nu_self": 1.0, "nu_cross": 0.5, "z": 1.0},
        {"mass": 1.0, "internal_dof": 1, "slots": [0], "nu_self": 1.0, "nu_cross": 0.5, "z": 1.0}
      ],
      "grid": {"velocity_points": 24, "internal_points": 24},
      "initial": [
        {"kind": "bimaxwellian", "n": 0.6, "u": [0.3, 0.0, 0.0], "eta_bar": [0.1],
         "lambda": 0.9, "theta": 1.0, "theta0": 0.85,
         "secondary": {"n": 0.5, "u": [-0.3, 0.1, 0.0], "eta_bar": [-0.1],
                       "lambda": 0.7, "theta": 0.8}},
        {"kind": "maxwellian", "n": 0.8, "u": [0.0, 0.0, 0.0], "eta_bar": [0.0],
         "lambda": 1.0, "theta": 1.0}
      ]
    })json");
    const pbgk::SystemState s = pbgk::build_initial_state(cfg);
    REQUIRE(s.sp.size() == 2);
    const pbgk::MacroState m0 = pbgk::compute_moments(s.sp[0].f, 1.0);
    CHECK(m0.n == doctest::Approx(1.1).epsilon(1e-8));
    CHECK(s.sp[0].theta == 0.85);
    CHECK(s.sp[1].theta == 1.0);  // theta0 unset: falls back to the shape value
  }

  SUBCASE("perturbation with zero amplitude is the plain Maxwellian") {
    const std::string base = tiny_mixture_json();
    pbgk::ScenarioConfig noisy = pbgk::parse_config(base);
    noisy.init[0].amplitude = 0.0;
    pbgk::ScenarioConfig plain = pbgk::parse_config(base);
    plain.init[0].kind = "maxwellian";
    plain.init[0].amplitude = 0.0;
    const pbgk::SystemState a = pbgk::build_initial_state(noisy);
    const pbgk::SystemState b = pbgk::build_initial_state(plain);
    REQUIRE(a.sp[0].f.value.size() == b.sp[0].f.value.size());
    CHECK(a.sp[0].f.value == b.sp[0].f.value);
  }
}
