#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "pbgk/csv.hpp"
#include "pbgk/errors.hpp"
#include "pbgk/scenario.hpp"

namespace {

pbgk::ScenarioConfig resolve_config(const std::string& ref) {
  if (std::filesystem::exists(ref)) return pbgk::load_config(ref);
  const std::vector<std::string> names = pbgk::builtin_scenario_names();
  if (std::find(names.begin(), names.end(), ref) != names.end())
    return pbgk::builtin_scenario(ref);
  throw pbgk::Error("no such config file or built-in scenario: " + ref);
}

void print_result(const pbgk::ScenarioResult& res, std::ostream& out) {
  out << res.name << " (config " << pbgk::hash_hex(res.hash) << "): ";
  if (res.aborted) {
    out << "ABORTED at exit code 2: " << res.abort_reason << "\n";
  } else {
    out << (res.all_passed() ? "pass" : "FAIL") << ", " << res.steps << " steps, dt "
        << res.dt << ", " << res.records.size() << " records\n";
  }
  for (const pbgk::CheckResult& c : res.checks)
    out << "  [" << (c.passed ? "PASS" : (c.asserted ? "FAIL" : "warn")) << "] " << c.name
        << ": " << c.detail << "\n";
  out << "  wrote " << res.csv_path << " and " << res.summary_path << "\n";
}

// Re-verifies from the stored rows what can be verified without re-running:
// the distance-entropy bound per species and Lyapunov monotonicity.
int report_file(const std::string& path) {
  const pbgk::CsvTable t = pbgk::read_csv_file(path);
  std::cout << path << ":\n";
  for (const auto& [key, value] : t.metadata)
    std::cout << "  " << key << " = " << value << "\n";
  std::cout << "  " << t.rows.size() << " rows, " << t.columns.size() << " columns\n";
  if (t.rows.empty()) return 0;

  bool ok = true;
  bool timeseries = true;
  try {
    t.column_index("time");
  } catch (const pbgk::UnknownKey&) {
    timeseries = false;  // draw-table CSV, nothing to re-verify here
  }
  if (!timeseries) return 0;

  for (int k = 1;; ++k) {
    const std::string suffix = "_" + std::to_string(k);
    std::size_t ih = 0, il = 0;
    try {
      ih = t.column_index("h_f_Meq" + suffix);
      il = t.column_index("l1_f_Meq" + suffix);
    } catch (const pbgk::UnknownKey&) {
      break;
    }
    double worst = std::numeric_limits<double>::infinity();
    for (const std::vector<double>& row : t.rows) {
      const double slack = 4.0 * std::sqrt(std::max(0.0, row[ih])) - row[il];
      worst = std::min(worst, slack);
      if (slack < -1e-10 * std::max(1.0, row[il])) ok = false;
    }
    std::cout << "  species " << k << ": worst distance-bound slack " << worst << "\n";
  }
  try {
    const std::vector<double> lyap = t.column("lyapunov");
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < lyap.size(); ++i) {
      const double allowed = 1e-8 * std::max(1.0, std::abs(lyap[i]));
      worst_rise = std::max(worst_rise, lyap[i + 1] - lyap[i]);
      if (lyap[i + 1] - lyap[i] > allowed) ok = false;
    }
    std::cout << "  lyapunov: worst increase " << worst_rise << "\n";
  } catch (const pbgk::UnknownKey&) {
  }
  std::cout << "  re-verification " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic relaxation-model runner and verification suite"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::string config_ref;
  pbgk::RunOverrides ov;
  int threads = 0;
  std::vector<std::string> report_paths;

  CLI::App* cmd_run = app.add_subcommand("run", "Run one scenario (config file or built-in name)");
  cmd_run->add_option("config", config_ref, "Config file path or built-in scenario name")
      ->required();
  cmd_run->add_option("--out-dir", out_dir, "Output directory (default: out)");
  cmd_run->add_option("--seed", ov.seed, "Override the scenario seed");
  cmd_run->add_option("--dt", ov.dt, "Override the time step (0 = automatic)");
  cmd_run->add_option("--t-end", ov.t_end, "Override the final time");
  cmd_run->add_option("--stride", ov.stride, "Override the observer stride");

  CLI::App* cmd_all = app.add_subcommand("run-all", "Run every built-in scenario");
  cmd_all->add_option("--out-dir", out_dir, "Output directory (default: out)");
  cmd_all->add_option("--threads", threads, "Worker threads (default: hardware limit)");

  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Parse a config and print its resolved form");
  cmd_validate->add_option("config", config_ref, "Config file path or built-in scenario name")
      ->required();

  CLI::App* cmd_report = app.add_subcommand("report", "Summarize and re-verify result CSVs");
  cmd_report->add_option("csv", report_paths, "CSV files written by run")->required();

  CLI::App* cmd_list = app.add_subcommand("list", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      const pbgk::ScenarioConfig cfg = resolve_config(config_ref);
      const pbgk::ScenarioResult res = pbgk::run_scenario(cfg, out_dir, ov);
      print_result(res, std::cout);
      return res.exit_code();
    }
    if (cmd_all->parsed()) {
      const std::vector<std::string> names = pbgk::builtin_scenario_names();
      unsigned n = threads > 0 ? static_cast<unsigned>(threads)
                               : std::max(1u, std::thread::hardware_concurrency());
      n = std::min<unsigned>(n, static_cast<unsigned>(names.size()));
      std::atomic<std::size_t> next{0};
      std::atomic<int> exit_code{0};
      std::mutex io;
      auto worker = [&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= names.size()) return;
          int code = 0;
          std::ostringstream buf;
          try {
            const pbgk::ScenarioResult res =
                pbgk::run_scenario(pbgk::builtin_scenario(names[i]), out_dir);
            print_result(res, buf);
            code = res.exit_code();
          } catch (const pbgk::Error& e) {
            buf << names[i] << ": error: " << e.what() << "\n";
            code = 3;
          }
          int prev = exit_code.load();
          while (prev < code && !exit_code.compare_exchange_weak(prev, code)) {
          }
          const std::lock_guard<std::mutex> lock(io);
          std::cout << buf.str() << std::flush;
        }
      };
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
      for (std::thread& th : pool) th.join();
      std::cout << "aggregate exit code " << exit_code.load() << "\n";
      return exit_code.load();
    }
    if (cmd_validate->parsed()) {
      const pbgk::ScenarioConfig cfg = resolve_config(config_ref);
      std::cout << pbgk::emit_config(cfg);
      std::cout << "config_hash " << pbgk::hash_hex(pbgk::config_hash(cfg)) << "\n";
      return 0;
    }
    if (cmd_report->parsed()) {
      int code = 0;
      for (const std::string& p : report_paths) code = std::max(code, report_file(p));
      return code;
    }
    if (cmd_list->parsed()) {
      for (const std::string& name : pbgk::builtin_scenario_names())
        std::cout << name << "\n";
      return 0;
    }
  } catch (const pbgk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
