#include "pbgk/maxwellian.hpp"

#include <cmath>
#include <cstddef>

#include "pbgk/detail/rows.hpp"
#include "pbgk/errors.hpp"

namespace pbgk {

GaussianShape maxwellian_shape(const MacroState& m, double theta, int d, int l) {
  GaussianShape g;
  g.n = m.n;
  g.u = m.u;
  g.eta_bar = m.eta_bar;
  g.lambda = lambda_from_constraint(m.T_t, m.T_r, theta, d, l);
  g.theta = theta;
  return g;
}

GaussianShape single_temperature_shape(const GaussianShape& g, int d, int l) {
  GaussianShape out = g;
  const double T = equilibrium_temperature(g.lambda, g.theta, d, l);
  out.lambda = T;
  out.theta = T;
  return out;
}

double gaussian_peak(const GaussianShape& g, double mass, int d, int l) {
  const double two_pi = 2.0 * M_PI;
  double log_norm = -0.5 * d * std::log(two_pi * g.lambda / mass);
  if (l > 0) log_norm += -0.5 * l * std::log(two_pi * g.theta / mass);
  return g.n * std::exp(log_norm);
}

double gaussian_entropy(const GaussianShape& g, double mass, int d, int l) {
  if (g.n <= 0.0) return 0.0;
  return g.n * (std::log(gaussian_peak(g, mass, d, l)) - 0.5 * (d + l));
}

double gaussian_cross_entropy(const GaussianShape& g, const GaussianShape& m, double mass,
                              int d, int l) {
  if (g.n <= 0.0) return 0.0;
  double s = std::log(gaussian_peak(m, mass, d, l)) - 0.5 * d * g.lambda / m.lambda;
  double du2 = 0.0;
  for (int a = 0; a < d; ++a) {
    const auto i = static_cast<std::size_t>(a);
    du2 += (g.u[i] - m.u[i]) * (g.u[i] - m.u[i]);
  }
  s -= mass * du2 / (2.0 * m.lambda);
  if (l > 0) {
    s -= 0.5 * l * g.theta / m.theta;
    double de2 = 0.0;
    for (int a = 0; a < l; ++a) {
      const auto i = static_cast<std::size_t>(a);
      de2 += (g.eta_bar[i] - m.eta_bar[i]) * (g.eta_bar[i] - m.eta_bar[i]);
    }
    s -= mass * de2 / (2.0 * m.theta);
  }
  return g.n * s;
}

void accumulate_gaussian(std::vector<double>& out, double scale, const GaussianShape& g,
                         double mass, const PhaseGrid& grid) {
  const int dims = grid.dim();
  const int d = grid.velocity_dim();
  const int l = grid.internal_dim();
  if (g.n == 0.0) return;
  if (!(g.lambda > 0.0)) throw NonpositiveTemperature("lambda", g.lambda);
  if (l > 0 && !(g.theta > 0.0)) throw NonpositiveTemperature("theta", g.theta);

  // 1D factor arrays, exp applied per axis point.
  std::vector<std::vector<double>> fac(static_cast<std::size_t>(dims));
  for (int a = 0; a < dims; ++a) {
    const bool vel = grid.is_velocity_axis(a);
    const double center = vel ? g.u[static_cast<std::size_t>(a)] : g.eta_bar[static_cast<std::size_t>(a - d)];
    const double inv_two_var = mass / (2.0 * (vel ? g.lambda : g.theta));
    const std::vector<double>& x = grid.coords(a);
    auto& fa = fac[static_cast<std::size_t>(a)];
    fa.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double dx = x[i] - center;
      fa[i] = std::exp(-dx * dx * inv_two_var);
    }
  }

  const double amp = scale * gaussian_peak(g, mass, d, l);
  const int last = dims - 1;
  const int nl = grid.axis(last).points;
  const std::vector<double>& fl = fac[static_cast<std::size_t>(last)];
  detail::for_each_row(grid, [&](std::size_t off, const std::vector<int>& idx) {
    double lead = amp;
    for (int a = 0; a < last; ++a)
      lead *= fac[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    double* row = out.data() + off;
    for (int j = 0; j < nl; ++j) row[j] += lead * fl[static_cast<std::size_t>(j)];
  });
}

DistributionField sample_gaussian(const GaussianShape& g, double mass, GridPtr grid) {
  DistributionField f(std::move(grid));
  accumulate_gaussian(f.value, 1.0, g, mass, *f.grid);
  return f;
}

namespace {

int global_internal_size(const SpeciesSpec& s1, const SpeciesSpec& s2) {
  int m = 0;
  for (int s : s1.slots) m = std::max(m, s + 1);
  for (int s : s2.slots) m = std::max(m, s + 1);
  return m;
}

std::vector<double> embed(const std::vector<double>& local, const std::vector<int>& slots, int m) {
  std::vector<double> g(static_cast<std::size_t>(m), 0.0);
  for (std::size_t i = 0; i < slots.size(); ++i) g[static_cast<std::size_t>(slots[i])] = local[i];
  return g;
}

std::vector<double> project(const std::vector<double>& global, const std::vector<int>& slots) {
  std::vector<double> local(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) local[i] = global[static_cast<std::size_t>(slots[i])];
  return local;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

ExchangePair exchange_coefficients(const GaussianShape& g1, const GaussianShape& g2,
                                   const SpeciesSpec& s1, const SpeciesSpec& s2,
                                   const MixtureParams& p, int d) {
  const double eps = epsilon_ratio(s1.nu_cross, s2.nu_cross);
  const double m1 = s1.mass, m2 = s2.mass;
  const int l1 = s1.internal_dof, l2 = s2.internal_dof;

  ExchangePair out;
  out.g12.n = g1.n;
  out.g21.n = g2.n;

  // Mixed velocities.
  out.g12.u.resize(static_cast<std::size_t>(d));
  out.g21.u.resize(static_cast<std::size_t>(d));
  double du2 = 0.0;
  for (int a = 0; a < d; ++a) {
    const double u1 = g1.u[static_cast<std::size_t>(a)], u2 = g2.u[static_cast<std::size_t>(a)];
    out.g12.u[static_cast<std::size_t>(a)] = p.delta * u1 + (1.0 - p.delta) * u2;
    out.g21.u[static_cast<std::size_t>(a)] = u2 - m1 / m2 * eps * (1.0 - p.delta) * (u2 - u1);
    du2 += (u1 - u2) * (u1 - u2);
  }

  // Mixed internal means, combined in the global internal-variable space.
  const int M = global_internal_size(s1, s2);
  const std::vector<double> e1 = embed(g1.eta_bar, s1.slots, M);
  const std::vector<double> e2 = embed(g2.eta_bar, s2.slots, M);
  std::vector<double> mix12(static_cast<std::size_t>(M)), mix21(static_cast<std::size_t>(M));
  double de2 = 0.0;
  for (int i = 0; i < M; ++i) {
    const auto k = static_cast<std::size_t>(i);
    mix12[k] = p.beta * e1[k] + (1.0 - p.beta) * e2[k];
    mix21[k] = e2[k] - m1 / m2 * eps * (1.0 - p.beta) * (e2[k] - e1[k]);
    de2 += (e1[k] - e2[k]) * (e1[k] - e2[k]);
  }
  out.g12.eta_bar = project(mix12, s1.slots);
  out.g21.eta_bar = project(mix21, s2.slots);

  // Mixed temperatures. The bracket on |u1-u2|^2 comes from the pairwise
  // energy-exchange balance; the eta-norm corrections play the same role for
  // the internal block.
  out.g12.lambda = p.alpha * g1.lambda + (1.0 - p.alpha) * g2.lambda + p.gamma * du2;
  out.g12.theta = (l1 * g1.theta + l2 * g2.theta) / static_cast<double>(l1 + l2) + p.gamma_tilde * de2;
  out.g21.lambda =
      (eps * m1 / d * (1.0 - p.delta) * (m1 / m2 * eps * (p.delta - 1.0) + p.delta + 1.0) - eps * p.gamma) * du2 +
      eps * (1.0 - p.alpha) * g1.lambda + (1.0 - eps * (1.0 - p.alpha)) * g2.lambda;
  const double share = eps * l1 / static_cast<double>(l1 + l2);
  out.g21.theta = share * g1.theta + (1.0 - share) * g2.theta -
                  static_cast<double>(l1) / l2 * eps * p.gamma_tilde * de2 -
                  eps * m1 / l2 * (norm2(out.g12.eta_bar) - norm2(g1.eta_bar)) -
                  m2 / l2 * (norm2(out.g21.eta_bar) - norm2(g2.eta_bar));

  if (!(out.g12.lambda > 0.0)) throw NonpositiveExchangeTemperature("lambda12", out.g12.lambda);
  if (!(out.g21.lambda > 0.0)) throw NonpositiveExchangeTemperature("lambda21", out.g21.lambda);
  if (!(out.g12.theta > 0.0)) throw NonpositiveExchangeTemperature("theta12", out.g12.theta);
  if (!(out.g21.theta > 0.0)) throw NonpositiveExchangeTemperature("theta21", out.g21.theta);

  out.T12 = equilibrium_temperature(out.g12.lambda, out.g12.theta, d, l1);
  out.T21 = equilibrium_temperature(out.g21.lambda, out.g21.theta, d, l2);
  return out;
}

}  // namespace pbgk
