#ifndef PBGK_INTEGRATOR_HPP
#define PBGK_INTEGRATOR_HPP

#include <functional>
#include <string>
#include <vector>

#include "pbgk/model.hpp"

namespace pbgk {

enum class Scheme { euler, rk4 };

struct IntegratorOptions {
  Scheme scheme = Scheme::rk4;
  int max_halvings = 12;  // positivity-fallback substep limit (2^max pieces)
};

struct StepEvent {
  double time = 0.0;
  std::string what;
};

// Fixed-step time integrator for the relaxation models. The distribution and
// the per-species relaxation temperature advance through the same scheme with
// shared stage states, so the pair stays coupled to the order of the scheme.
class Integrator {
public:
  Integrator(ModelSetup setup, IntegratorOptions opt = {});

  const ModelSetup& setup() const { return setup_; }

  // Default step 0.05 / (largest relaxation rate at the given state).
  double suggest_dt(const SystemState& s);

  // Advances by dt. Steps that lose positivity beyond roundoff are retried as
  // chains of Euler substeps with halved dt (events record each fallback);
  // throws PositivityLoss when max_halvings is exhausted.
  void step(SystemState& s, double dt);

  const std::vector<StepEvent>& events() const { return events_; }
  void clear_events() { events_.clear(); }

private:
  bool try_rk4(SystemState& s, double dt);
  bool try_euler(SystemState& s, double dt);
  // Nonnegative up to a clamped roundoff allowance; false = genuine loss.
  bool restore_positivity(SystemState& s);

  ModelSetup setup_;
  IntegratorOptions opt_;
  std::vector<StepEvent> events_;
  RhsEval k_;
  std::vector<std::vector<double>> acc_df_;
  std::vector<double> acc_dtheta_;
  SystemState stage_;
  SystemState backup_;
};

struct RunOptions {
  double t_end = 1.0;
  double dt = 0.0;  // 0 = use suggest_dt at the initial state
  int stride = 10;  // observer cadence in steps
};

struct RunResult {
  std::vector<StepEvent> events;
  double dt = 0.0;
  int steps = 0;
  bool aborted = false;
  double abort_time = 0.0;
  std::string abort_reason;
};

// Fixed-step run with an observer at t = 0, every `stride` steps, and at the
// final time. Domain errors abort the run and are reported in the result
// rather than rethrown.
RunResult run(Integrator& integ, SystemState& s, const RunOptions& opt,
              const std::function<void(const SystemState&)>& observe);

}  // namespace pbgk

#endif
