#include "pbgk/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pbgk/errors.hpp"

namespace pbgk {

namespace {

double max_rate(const ModelSetup& setup, const RhsEval& k) {
  if (setup.kind == ModelKind::alpp) return setup.alpp.a_nu;
  double rate = 0.0;
  for (std::size_t s = 0; s < k.eval.size(); ++s) {
    const SpeciesEval& ev = k.eval[s];
    const int l = setup.species[s].internal_dof;
    double r = ev.a_self + ev.a_cross;
    if (l > 0) {
      const double stage = ev.a_self / setup.species[s].z * setup.d / static_cast<double>(setup.d + l);
      r = std::max(r, stage + ev.a_self + ev.a_cross);
    }
    rate = std::max(rate, r);
  }
  return rate;
}

double total_rate_bound(const ModelSetup& setup, const RhsEval& k) {
  if (setup.kind == ModelKind::alpp) return setup.alpp.a_nu;
  double rate = 0.0;
  for (const SpeciesEval& ev : k.eval) rate = std::max(rate, ev.a_self + ev.a_cross);
  return rate;
}

}  // namespace

Integrator::Integrator(ModelSetup setup, IntegratorOptions opt)
    : setup_(std::move(setup)), opt_(opt) {
  setup_.validate();
}

double Integrator::suggest_dt(const SystemState& s) {
  assemble_rhs(s, setup_, k_);
  const double rate = max_rate(setup_, k_);
  if (!(rate > 0.0)) return 1.0;
  return 0.05 / rate;
}

bool Integrator::restore_positivity(SystemState& s) {
  for (SpeciesState& sp : s.sp) {
    double peak = 0.0;
    for (double v : sp.f.value) peak = std::max(peak, v);
    double clamped = 0.0;
    for (double& v : sp.f.value) {
      if (v < 0.0) {
        clamped -= v;
        v = 0.0;
      }
    }
    // Roundoff-level negatives are clamped; anything that moves real mass is a
    // genuine positivity loss and the step must be redone smaller.
    const double budget = 1e-13 * peak * static_cast<double>(sp.f.size());
    if (clamped > budget) return false;
  }
  return true;
}

bool Integrator::try_rk4(SystemState& s, double dt) {
  const std::size_t ns = s.sp.size();
  acc_df_.resize(ns);
  acc_dtheta_.assign(ns, 0.0);
  if (stage_.sp.size() != ns) stage_ = s;

  auto stage_from = [&](double c) {
    stage_.time = s.time;
    for (std::size_t i = 0; i < ns; ++i) {
      const std::vector<double>& base = s.sp[i].f.value;
      std::vector<double>& dst = stage_.sp[i].f.value;
      stage_.sp[i].f.grid = s.sp[i].f.grid;
      dst.resize(base.size());
      const std::vector<double>& kd = k_.df[i];
      for (std::size_t j = 0; j < base.size(); ++j) dst[j] = base[j] + c * kd[j];
      stage_.sp[i].theta = s.sp[i].theta + c * k_.dtheta[i];
    }
  };
  auto accumulate = [&](double w) {
    for (std::size_t i = 0; i < ns; ++i) {
      std::vector<double>& acc = acc_df_[i];
      const std::vector<double>& kd = k_.df[i];
      if (acc.size() != kd.size()) acc.assign(kd.size(), 0.0);
      for (std::size_t j = 0; j < kd.size(); ++j) acc[j] += w * kd[j];
      acc_dtheta_[i] += w * k_.dtheta[i];
    }
  };

  for (std::size_t i = 0; i < ns; ++i) {
    acc_df_[i].assign(s.sp[i].f.size(), 0.0);
  }
  assemble_rhs(s, setup_, k_);
  accumulate(1.0);
  stage_from(0.5 * dt);
  assemble_rhs(stage_, setup_, k_);
  accumulate(2.0);
  stage_from(0.5 * dt);
  assemble_rhs(stage_, setup_, k_);
  accumulate(2.0);
  stage_from(dt);
  assemble_rhs(stage_, setup_, k_);
  accumulate(1.0);

  const double c = dt / 6.0;
  for (std::size_t i = 0; i < ns; ++i) {
    std::vector<double>& val = s.sp[i].f.value;
    const std::vector<double>& acc = acc_df_[i];
    for (std::size_t j = 0; j < val.size(); ++j) val[j] += c * acc[j];
    s.sp[i].theta += c * acc_dtheta_[i];
  }
  s.time += dt;
  return restore_positivity(s);
}

bool Integrator::try_euler(SystemState& s, double dt) {
  assemble_rhs(s, setup_, k_);
  // Convex-combination condition: dt times the total collision rate below one.
  if (!(dt * total_rate_bound(setup_, k_) < 1.0)) return false;
  for (std::size_t i = 0; i < s.sp.size(); ++i) {
    std::vector<double>& val = s.sp[i].f.value;
    const std::vector<double>& kd = k_.df[i];
    for (std::size_t j = 0; j < val.size(); ++j) val[j] += dt * kd[j];
    s.sp[i].theta += dt * k_.dtheta[i];
  }
  s.time += dt;
  return restore_positivity(s);
}

void Integrator::step(SystemState& s, double dt) {
  backup_ = s;
  const bool ok = opt_.scheme == Scheme::rk4 ? try_rk4(s, dt) : try_euler(s, dt);
  if (ok) return;

  events_.push_back({backup_.time, "positivity fallback: redoing step with Euler substeps"});
  int pieces = 2;
  for (int round = 0; round < opt_.max_halvings; ++round, pieces *= 2) {
    s = backup_;
    bool sub_ok = true;
    const double h = dt / pieces;
    for (int p = 0; p < pieces && sub_ok; ++p) sub_ok = try_euler(s, h);
    if (sub_ok) return;
    events_.push_back({backup_.time, "positivity fallback: halving substep again"});
  }
  s = backup_;
  double worst = 0.0;
  throw PositivityLoss(backup_.time, worst);
}

RunResult run(Integrator& integ, SystemState& s, const RunOptions& opt,
              const std::function<void(const SystemState&)>& observe) {
  RunResult res;
  const int stride = std::max(1, opt.stride);
  try {
    const double dt = opt.dt > 0.0 ? opt.dt : integ.suggest_dt(s);
    res.dt = dt;
    observe(s);
    if (opt.t_end <= 0.0) return res;
    const int steps = std::max(1, static_cast<int>(std::ceil(opt.t_end / dt - 1e-12)));
    for (int i = 0; i < steps; ++i) {
      const double remaining = opt.t_end - s.time;
      const double h = std::min(dt, remaining);
      if (h <= 0.0) break;
      integ.step(s, h);
      ++res.steps;
      if ((i + 1) % stride == 0 && i + 1 < steps) observe(s);
    }
    observe(s);
  } catch (const Error& e) {
    res.aborted = true;
    res.abort_time = s.time;
    res.abort_reason = e.what();
  }
  res.events = integ.events();
  return res;
}

}  // namespace pbgk
