#include "pbgk/model.hpp"

#include <cmath>
#include <cstddef>

#include "pbgk/detail/rows.hpp"
#include "pbgk/errors.hpp"

namespace pbgk {

const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::alpp: return "alpp";
    case ModelKind::kpp_one: return "kpp_one";
    case ModelKind::bip_one: return "bip_one";
    case ModelKind::kpp_mix: return "kpp_mix";
    case ModelKind::new_mix: return "new_mix";
  }
  return "?";
}

ModelKind model_from_name(const std::string& name) {
  if (name == "alpp") return ModelKind::alpp;
  if (name == "kpp_one") return ModelKind::kpp_one;
  if (name == "bip_one") return ModelKind::bip_one;
  if (name == "kpp_mix") return ModelKind::kpp_mix;
  if (name == "new_mix") return ModelKind::new_mix;
  throw ParseError("unknown model name: " + name);
}

bool is_mixture(ModelKind k) { return k == ModelKind::kpp_mix || k == ModelKind::new_mix; }
int species_count(ModelKind k) { return is_mixture(k) ? 2 : 1; }

void ModelSetup::validate() const {
  std::vector<std::string> bad;
  if (static_cast<int>(species.size()) != species_count(kind)) bad.push_back("species_count");
  if (d < 1) bad.push_back("velocity_dim_positive");
  if (!bad.empty()) throw ConstraintViolated(std::move(bad));
  for (const SpeciesSpec& s : species) s.validate(d);
  if (kind == ModelKind::alpp) {
    std::vector<std::string> abad;
    if (d != 3) abad.push_back("alpp_velocity_dim_three");
    if (species[0].mass != 1.0) abad.push_back("alpp_unit_mass");
    if (species[0].internal_dof != 1) abad.push_back("alpp_scalar_energy_axis");
    if (!(alpp.delta_dof > 0)) abad.push_back("alpp_delta_dof_positive");
    if (!(alpp.a_nu > 0)) abad.push_back("alpp_frequency_positive");
    if (!(alpp.theta >= 0.0 && alpp.theta <= 1.0)) abad.push_back("alpp_theta_range");
    if (!abad.empty()) throw ConstraintViolated(std::move(abad));
  }
  if (is_mixture(kind)) validate_mixture_params(mix, species[0], species[1], d);
}

void collision_rates(const ModelSetup& setup, const std::vector<double>& densities,
                     std::vector<double>& a_self, std::vector<double>& a_cross) {
  const std::size_t ns = setup.species.size();
  a_self.resize(ns);
  a_cross.resize(ns);
  double total = 0.0;
  for (double nk : densities) total += nk;
  for (std::size_t k = 0; k < ns; ++k) {
    const double nj = ns == 2 ? densities[1 - k] : 0.0;
    double self = setup.species[k].nu_self * densities[k];
    double cross = setup.species[k].nu_cross * nj;
    if (setup.law == FrequencyLaw::density_weighted && total > 0.0) {
      self /= total;
      cross /= total;
    }
    a_self[k] = self;
    a_cross[k] = cross;
  }
}

namespace {

// Relaxation-rate coefficient of the Lambda -> Theta stage:
// nu n / Z_r = (nu n / z) * d / (d + l).
double stage_rate(double a_self, double z, int d, int l) {
  return a_self / z * d / static_cast<double>(d + l);
}

void gaussian_model_rhs(const SystemState& s, const ModelSetup& setup, RhsEval& out) {
  const std::size_t ns = setup.species.size();
  const int d = setup.d;
  out.eval.resize(ns);
  out.df.resize(ns);
  out.dtheta.assign(ns, 0.0);
  out.has_exchange = false;

  std::vector<double> densities(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    SpeciesEval& ev = out.eval[k];
    ev.macro = compute_moments(s.sp[k].f, setup.species[k].mass);
    densities[k] = ev.macro.n;
    const int l = setup.species[k].internal_dof;
    ev.theta = l > 0 ? s.sp[k].theta : 0.0;
    ev.lambda = lambda_from_constraint(ev.macro.T_t, ev.macro.T_r, ev.theta, d, l);
    ev.T = equilibrium_temperature(ev.lambda, ev.theta, d, l);
    ev.max_shape = maxwellian_shape(ev.macro, ev.theta, d, l);
  }

  std::vector<double> a_self, a_cross;
  collision_rates(setup, densities, a_self, a_cross);
  for (std::size_t k = 0; k < ns; ++k) {
    out.eval[k].a_self = a_self[k];
    out.eval[k].a_cross = a_cross[k];
  }

  if (is_mixture(setup.kind)) {
    out.exch = exchange_coefficients(out.eval[0].max_shape, out.eval[1].max_shape,
                                     setup.species[0], setup.species[1], setup.mix, d);
    out.has_exchange = true;
  }

  for (std::size_t k = 0; k < ns; ++k) {
    const SpeciesSpec& spk = setup.species[k];
    const SpeciesEval& ev = out.eval[k];
    const DistributionField& f = s.sp[k].f;
    const int l = spk.internal_dof;

    std::vector<double>& df = out.df[k];
    df.resize(f.size());
    const double a_tot = ev.a_self + (is_mixture(setup.kind) ? ev.a_cross : 0.0);
    const double* fv = f.value.data();
    for (std::size_t i = 0; i < df.size(); ++i) df[i] = -a_tot * fv[i];
    accumulate_gaussian(df, ev.a_self, ev.max_shape, spk.mass, *f.grid);
    if (is_mixture(setup.kind)) {
      const GaussianShape& cross = k == 0 ? out.exch.g12 : out.exch.g21;
      accumulate_gaussian(df, ev.a_cross, cross, spk.mass, *f.grid);
    }

    if (l == 0) continue;
    const double r = stage_rate(ev.a_self, spk.z, d, l);
    // Mixture Theta equations carry the recentering term a_kj (m/l)|eta_kj - eta_k|^2
    // so that Theta stays the exact centered second moment of the M equation.
    double recenter = 0.0;
    if (is_mixture(setup.kind)) {
      const GaussianShape& cross = k == 0 ? out.exch.g12 : out.exch.g21;
      double q = 0.0;
      for (std::size_t a = 0; a < cross.eta_bar.size(); ++a) {
        const double de = cross.eta_bar[a] - ev.macro.eta_bar[a];
        q += de * de;
      }
      recenter = ev.a_cross * spk.mass / l * q;
    }
    switch (setup.kind) {
      case ModelKind::bip_one:
        out.dtheta[k] = r * (ev.lambda - ev.theta);
        break;
      case ModelKind::kpp_one:
        out.dtheta[k] = r * (ev.lambda - ev.theta) + ev.a_self * (ev.theta - ev.macro.T_r);
        break;
      case ModelKind::kpp_mix: {
        const double theta_cross = k == 0 ? out.exch.g12.theta : out.exch.g21.theta;
        out.dtheta[k] = r * (ev.lambda - ev.theta) + ev.a_self * (ev.theta - ev.macro.T_r) +
                        ev.a_cross * (theta_cross - ev.macro.T_r) + recenter;
        break;
      }
      case ModelKind::new_mix: {
        const double T_cross = k == 0 ? out.exch.T12 : out.exch.T21;
        out.dtheta[k] = r * (ev.lambda - ev.theta) + ev.a_cross * (T_cross - ev.theta) + recenter;
        break;
      }
      case ModelKind::alpp:
        break;
    }
  }
}

}  // namespace

double alpp_lambda_delta(double delta_dof) { return 1.0 / std::tgamma(0.5 * delta_dof + 1.0); }

double alpp_mix_temperature(const AlppMoments& m, const AlppParams& p) {
  return (1.0 - p.theta) * m.T_tr + p.theta * m.T_equ;
}

double alpp_relax_temperature(const AlppMoments& m, const AlppParams& p) {
  return p.theta * m.T_equ + (1.0 - p.theta) * m.T_int;
}

AlppMoments alpp_moments(const DistributionField& f, double delta_dof) {
  const PhaseGrid& g = *f.grid;
  const int d = g.velocity_dim();
  const int last = g.dim() - 1;
  const int nl = g.axis(last).points;
  const std::vector<double>& xi = g.coords(last);
  std::vector<double> eps_i(static_cast<std::size_t>(nl));
  for (int j = 0; j < nl; ++j) eps_i[static_cast<std::size_t>(j)] = std::pow(xi[static_cast<std::size_t>(j)], 2.0 / delta_dof);

  const double* v = f.value.data();
  KahanSum acc_n, acc_e;
  std::vector<KahanSum> acc_u(static_cast<std::size_t>(d));
  detail::for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double rowsum = 0.0, rowe = 0.0;
    for (int j = 0; j < nl; ++j) {
      const double fv = v[off + static_cast<std::size_t>(j)];
      rowsum += fv;
      rowe += fv * eps_i[static_cast<std::size_t>(j)];
    }
    acc_n.add(rowsum);
    acc_e.add(rowe);
    for (int a = 0; a < d; ++a)
      acc_u[static_cast<std::size_t>(a)].add(rowsum * g.coords(a)[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
  });

  const double w = g.cell_volume();
  AlppMoments m;
  m.rho = acc_n.value() * w;
  if (!(m.rho > 0.0)) throw VacuumState(m.rho);
  m.u.resize(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) m.u[static_cast<std::size_t>(a)] = acc_u[static_cast<std::size_t>(a)].value() * w / m.rho;

  KahanSum acc_q;
  detail::for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double rowsum = 0.0;
    for (int j = 0; j < nl; ++j) rowsum += v[off + static_cast<std::size_t>(j)];
    double q = 0.0;
    for (int a = 0; a < d; ++a) {
      const double dx =
          g.coords(a)[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] - m.u[static_cast<std::size_t>(a)];
      q += dx * dx;
    }
    acc_q.add(rowsum * q);
  });
  m.T_tr = acc_q.value() * w / (d * m.rho);
  const double e_int = acc_e.value() * w / m.rho;
  m.T_int = 2.0 * e_int / delta_dof;
  m.T_equ = (d * m.T_tr + delta_dof * m.T_int) / (d + delta_dof);
  return m;
}

namespace {

// Product field with Gaussian velocity factors at temperature T_vel and energy
// factor exp(-I^(2/delta)/T_en), scaled so the grid quadrature mass is rho.
DistributionField alpp_product(const AlppMoments& m, double delta_dof, double T_vel, double T_en,
                               GridPtr grid) {
  if (!(T_vel > 0.0)) throw NonpositiveTemperature("alpp velocity temperature", T_vel);
  if (!(T_en > 0.0)) throw NonpositiveTemperature("alpp energy temperature", T_en);
  const PhaseGrid& g = *grid;
  const int d = g.velocity_dim();
  const int last = g.dim() - 1;

  std::vector<std::vector<double>> fac(static_cast<std::size_t>(g.dim()));
  double mass_product = g.cell_volume();
  for (int a = 0; a < g.dim(); ++a) {
    const std::vector<double>& x = g.coords(a);
    auto& fa = fac[static_cast<std::size_t>(a)];
    fa.resize(x.size());
    double axis_sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e;
      if (a < d) {
        const double dx = x[i] - m.u[static_cast<std::size_t>(a)];
        e = -dx * dx / (2.0 * T_vel);
      } else {
        e = -std::pow(x[i], 2.0 / delta_dof) / T_en;
      }
      fa[i] = std::exp(e);
      axis_sum += fa[i];
    }
    mass_product *= axis_sum;
  }

  DistributionField out(std::move(grid));
  const double amp = m.rho / mass_product;
  const int nl = g.axis(last).points;
  const std::vector<double>& fl = fac[static_cast<std::size_t>(last)];
  detail::for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double lead = amp;
    for (int a = 0; a < last; ++a)
      lead *= fac[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    double* row = out.value.data() + off;
    for (int j = 0; j < nl; ++j) row[j] += lead * fl[static_cast<std::size_t>(j)];
  });
  return out;
}

}  // namespace

DistributionField alpp_target(const AlppMoments& m, const AlppParams& p, GridPtr grid) {
  return alpp_product(m, p.delta_dof, alpp_mix_temperature(m, p), alpp_relax_temperature(m, p),
                      std::move(grid));
}

DistributionField alpp_equilibrium(const AlppMoments& m, const AlppParams& p, GridPtr grid) {
  return alpp_product(m, p.delta_dof, m.T_equ, m.T_equ, std::move(grid));
}

void assemble_rhs(const SystemState& s, const ModelSetup& setup, RhsEval& out) {
  if (setup.kind != ModelKind::alpp) {
    gaussian_model_rhs(s, setup, out);
    return;
  }
  out.df.resize(1);
  out.dtheta.assign(1, 0.0);
  out.eval.clear();
  out.has_exchange = false;
  const DistributionField& f = s.sp[0].f;
  out.alpp = alpp_moments(f, setup.alpp.delta_dof);
  DistributionField target = alpp_target(out.alpp, setup.alpp, f.grid);
  std::vector<double>& df = out.df[0];
  df.resize(f.size());
  const double anu = setup.alpp.a_nu;
  for (std::size_t i = 0; i < df.size(); ++i) df[i] = anu * (target.value[i] - f.value[i]);
}

}  // namespace pbgk
