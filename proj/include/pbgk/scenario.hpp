#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbgk/diagnostics.hpp"
#include "pbgk/integrator.hpp"
#include "pbgk/model.hpp"

namespace pbgk {

// Initial-condition recipe for one species. Shapes carry temperatures, not
// spreads: main.lambda is the translational temperature, main.theta the
// internal one.
struct InitialCondition {
  std::string kind = "maxwellian";  // maxwellian | bimaxwellian | perturbed
  GaussianShape main;
  GaussianShape secondary;  // bimaxwellian only: added to main
  double amplitude = 0.0;   // perturbed only: multiplicative noise strength
  double theta0 = -1.0;     // initial relaxation temperature; < 0 means main.theta
};

// Per-species tensor grid sizing. Velocity axes are centered between the
// initial mean velocity and the conserved final one and cover sigma_span
// thermal widths of the largest temperature scaled by temp_cap.
struct GridSpec {
  int velocity_points = 24;
  int internal_points = 16;
  double sigma_span = 7.2;
  double temp_cap = 1.3;
};

// Knobs of the named invariant checks.
struct CheckParams {
  int draws = 1000;                  // exchange_identities / lemma_sweep
  double envelope_tolerance = 1.01;  // quadrature headroom on the decay bound
  std::string expected_branch;       // regime: decay-constant branch that must bind
  double rate_tolerance = 0.05;      // regime: fitted rate vs oracle eigenvalue
  double alpp_rate_tolerance = 0.01; // alpp_rate: fitted rate vs theta * a_nu
  double oracle_tolerance = 1e-5;    // oracle_match sup-norm
};

struct ScenarioConfig {
  std::string name = "custom";
  ModelSetup setup;
  std::vector<InitialCondition> init;  // one per species
  GridSpec grid;
  RunOptions run;
  std::uint64_t seed = 1;
  double A_bound = 1.0;  // decay-theorem input bounds, A_bound >= B_bound > 0
  double B_bound = 1.0;
  std::vector<std::string> checks;
  CheckParams params;
};

// Config serialization: a hierarchical JSON document with a documented schema.
// parse_config throws ParseError (with line), UnknownKey for unrecognized
// keys at any level, and ConstraintViolated for admissibility violations.
// emit_config is canonical: parse(emit(c)) resolves to the same document.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string emit_config(const ScenarioConfig& cfg);
std::uint64_t config_hash(const ScenarioConfig& cfg);

// Built-in scenario library; every verification criterion has at least one
// entry. builtin_scenario throws UnknownKey for names not in the list.
std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

// Grids and initial fields realized from the config (exposed for tests).
SystemState build_initial_state(const ScenarioConfig& cfg);

struct CheckResult {
  std::string name;
  bool asserted = true;  // false = informational only (hypotheses unmet)
  bool passed = true;
  std::string detail;
};

struct ScenarioResult {
  std::string name;
  std::uint64_t hash = 0;
  std::vector<DiagnosticRecord> records;
  std::vector<CheckResult> checks;
  bool aborted = false;
  std::string abort_reason;
  double dt = 0.0;
  int steps = 0;
  std::string csv_path;
  std::string summary_path;

  bool all_passed() const;
  // 0 = asserted checks pass, 1 = an asserted check failed, 2 = numerical
  // abort. (Config errors throw before a result exists; the CLI maps them
  // to exit code 3.)
  int exit_code() const;
};

// Command-line overrides; negative values keep the config setting.
struct RunOverrides {
  double dt = -1.0;
  double t_end = -1.0;
  int stride = -1;
  std::int64_t seed = -1;
};

// Runs the scenario, writes <out_dir>/<name>.csv and <out_dir>/<name>_summary.json,
// evaluates the configured checks. Identical config and seed produce
// byte-identical CSV output.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                            const RunOverrides& ov = {});

}  // namespace pbgk
