#include "pbgk/macro.hpp"

#include <cstddef>

#include "pbgk/detail/rows.hpp"
#include "pbgk/errors.hpp"

namespace pbgk {

using detail::for_each_row;

MacroState compute_moments(const DistributionField& f, double mass) {
  const PhaseGrid& g = *f.grid;
  const int dims = g.dim();
  const int d = g.velocity_dim();
  const int l = g.internal_dim();
  const int last = dims - 1;
  const std::vector<double>& xl = g.coords(last);
  const int nl = g.axis(last).points;
  const double* v = f.value.data();

  // Pass 1: density and raw first moments per axis.
  KahanSum acc_n;
  std::vector<KahanSum> acc_m(static_cast<std::size_t>(dims));
  for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double rowsum = 0.0, rowmom = 0.0;
    for (int j = 0; j < nl; ++j) {
      const double fv = v[off + static_cast<std::size_t>(j)];
      rowsum += fv;
      rowmom += fv * xl[static_cast<std::size_t>(j)];
    }
    acc_n.add(rowsum);
    acc_m[static_cast<std::size_t>(last)].add(rowmom);
    for (int a = 0; a < last; ++a)
      acc_m[static_cast<std::size_t>(a)].add(rowsum * g.coords(a)[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
  });

  const double w = g.cell_volume();
  const double n = acc_n.value() * w;
  if (!(n > 0.0)) throw VacuumState(n);

  MacroState m;
  m.n = n;
  m.u.resize(static_cast<std::size_t>(d));
  m.eta_bar.resize(static_cast<std::size_t>(l));
  std::vector<double> center(static_cast<std::size_t>(dims));
  for (int a = 0; a < dims; ++a) {
    center[static_cast<std::size_t>(a)] = acc_m[static_cast<std::size_t>(a)].value() * w / n;
    if (a < d)
      m.u[static_cast<std::size_t>(a)] = center[static_cast<std::size_t>(a)];
    else
      m.eta_bar[static_cast<std::size_t>(a - d)] = center[static_cast<std::size_t>(a)];
  }

  // Pass 2: centered second moments, split into velocity and internal blocks.
  std::vector<double> dl2(static_cast<std::size_t>(nl));
  const double cl = center[static_cast<std::size_t>(last)];
  for (int j = 0; j < nl; ++j) {
    const double dx = xl[static_cast<std::size_t>(j)] - cl;
    dl2[static_cast<std::size_t>(j)] = dx * dx;
  }
  KahanSum acc_sv, acc_se;
  for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double rowsum = 0.0, rowq = 0.0;
    for (int j = 0; j < nl; ++j) {
      const double fv = v[off + static_cast<std::size_t>(j)];
      rowsum += fv;
      rowq += fv * dl2[static_cast<std::size_t>(j)];
    }
    (g.is_velocity_axis(last) ? acc_sv : acc_se).add(rowq);
    for (int a = 0; a < last; ++a) {
      const double dx =
          g.coords(a)[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] - center[static_cast<std::size_t>(a)];
      (g.is_velocity_axis(a) ? acc_sv : acc_se).add(rowsum * dx * dx);
    }
  });

  m.T_t = mass * acc_sv.value() * w / (static_cast<double>(d) * n);
  m.T_r = l > 0 ? mass * acc_se.value() * w / (static_cast<double>(l) * n) : 0.0;
  return m;
}

std::vector<double> pressure_tensor(const DistributionField& f, double mass) {
  const PhaseGrid& g = *f.grid;
  const MacroState m = compute_moments(f, mass);
  const int d = g.velocity_dim();
  const int dims = g.dim();
  const int last = dims - 1;
  const int nl = g.axis(last).points;
  const bool last_is_vel = g.is_velocity_axis(last);
  const std::vector<double>& xl = g.coords(last);
  const double ul = last_is_vel ? m.u[static_cast<std::size_t>(last)] : 0.0;
  const double* v = f.value.data();

  std::vector<KahanSum> acc(static_cast<std::size_t>(d * d));
  for_each_row(g, [&](std::size_t off, const std::vector<int>& idx) {
    double rowsum = 0.0, rowlin = 0.0, rowq = 0.0;
    for (int j = 0; j < nl; ++j) {
      const double fv = v[off + static_cast<std::size_t>(j)];
      rowsum += fv;
      if (last_is_vel) {
        const double dx = xl[static_cast<std::size_t>(j)] - ul;
        rowlin += fv * dx;
        rowq += fv * dx * dx;
      }
    }
    for (int a = 0; a < d && a < last; ++a) {
      const double da =
          g.coords(a)[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])] - m.u[static_cast<std::size_t>(a)];
      for (int b = 0; b < d && b < last; ++b) {
        const double db =
            g.coords(b)[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])] - m.u[static_cast<std::size_t>(b)];
        acc[static_cast<std::size_t>(a * d + b)].add(rowsum * da * db);
      }
      if (last_is_vel) {
        acc[static_cast<std::size_t>(a * d + last)].add(rowlin * da);
        acc[static_cast<std::size_t>(last * d + a)].add(rowlin * da);
      }
    }
    if (last_is_vel) acc[static_cast<std::size_t>(last * d + last)].add(rowq);
  });

  std::vector<double> P(static_cast<std::size_t>(d * d));
  for (std::size_t i = 0; i < P.size(); ++i) P[i] = mass * acc[i].value() * g.cell_volume();
  return P;
}

double lambda_from_constraint(double T_t, double T_r, double theta, int d, int l) {
  const double lambda = l > 0 ? T_t + static_cast<double>(l) / d * (T_r - theta) : T_t;
  if (!(lambda > 0.0)) throw NonpositiveLambda(lambda);
  return lambda;
}

double equilibrium_temperature(double lambda, double theta, int d, int l) {
  if (l == 0) return lambda;
  return (d * lambda + l * theta) / static_cast<double>(d + l);
}

}  // namespace pbgk
