#include "pbgk/moment_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pbgk/errors.hpp"

namespace pbgk {

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// nu n / Z_r = (nu n / z) * d / (d + l), as in the kinetic right-hand side.
double stage_rate(double a_self, double z, int d, int l) {
  return a_self / z * d / static_cast<double>(d + l);
}

// Uncentered second moments of a product Gaussian: int |v|^2 M and int |eta|^2 M.
double gauss_s2v(const GaussianShape& g, double mass, int d) {
  return g.n * (d * g.lambda / mass + norm2(g.u));
}

double gauss_s2e(const GaussianShape& g, double mass, int l) {
  return g.n * (l * g.theta / mass + norm2(g.eta_bar));
}

GaussianShape shape_of(const MomentState& st, const MomentDerived& de, double theta) {
  GaussianShape g;
  g.n = st.n;
  g.u = de.u;
  g.eta_bar = de.eta_bar;
  g.lambda = de.lambda;
  g.theta = theta;
  return g;
}

}  // namespace

MomentDerived derive_moments(const MomentState& st, double mass, int d, int l) {
  if (!(st.n > 0.0)) throw VacuumState(st.n);
  MomentDerived de;
  de.u.resize(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const auto i = static_cast<std::size_t>(a);
    de.u[i] = st.nu[i] / st.n;
  }
  de.T_t = mass * (st.s2v / st.n - norm2(de.u)) / d;
  if (!(de.T_t > 0.0)) throw NonpositiveTemperature("T_t", de.T_t);
  if (l > 0) {
    de.eta_bar.resize(static_cast<std::size_t>(l));
    for (int a = 0; a < l; ++a) {
      const auto i = static_cast<std::size_t>(a);
      de.eta_bar[i] = st.neta[i] / st.n;
    }
    de.T_r = mass * (st.s2e / st.n - norm2(de.eta_bar)) / l;
    if (!(de.T_r > 0.0)) throw NonpositiveTemperature("T_r", de.T_r);
  }
  de.lambda = lambda_from_constraint(de.T_t, de.T_r, st.theta, d, l);
  de.T = equilibrium_temperature(de.lambda, st.theta, d, l);
  return de;
}

AlppMoments derive_alpp(const MomentState& st, double delta_dof) {
  if (!(st.n > 0.0)) throw VacuumState(st.n);
  AlppMoments m;
  m.rho = st.n;
  m.u.resize(st.nu.size());
  for (std::size_t i = 0; i < st.nu.size(); ++i) m.u[i] = st.nu[i] / st.n;
  m.T_tr = (st.s2v / st.n - norm2(m.u)) / 3.0;
  if (!(m.T_tr > 0.0)) throw NonpositiveTemperature("T_tr", m.T_tr);
  m.T_int = 2.0 * (st.s2e / st.n) / delta_dof;
  if (!(m.T_int > 0.0)) throw NonpositiveTemperature("T_int", m.T_int);
  m.T_equ = (3.0 * m.T_tr + delta_dof * m.T_int) / (3.0 + delta_dof);
  return m;
}

MomentState moments_from_macro(const MacroState& m, double theta, double mass) {
  MomentState st;
  st.n = m.n;
  const int d = static_cast<int>(m.u.size());
  const int l = static_cast<int>(m.eta_bar.size());
  st.nu.resize(m.u.size());
  for (std::size_t i = 0; i < m.u.size(); ++i) st.nu[i] = m.n * m.u[i];
  st.neta.resize(m.eta_bar.size());
  for (std::size_t i = 0; i < m.eta_bar.size(); ++i) st.neta[i] = m.n * m.eta_bar[i];
  st.s2v = m.n * (d * m.T_t / mass + norm2(m.u));
  st.s2e = l > 0 ? m.n * (l * m.T_r / mass + norm2(m.eta_bar)) : 0.0;
  st.theta = theta;
  return st;
}

MomentState moments_from_alpp(const AlppMoments& m, double delta_dof) {
  MomentState st;
  st.n = m.rho;
  st.nu.resize(m.u.size());
  for (std::size_t i = 0; i < m.u.size(); ++i) st.nu[i] = m.rho * m.u[i];
  st.s2v = m.rho * (3.0 * m.T_tr + norm2(m.u));
  st.s2e = m.rho * 0.5 * delta_dof * m.T_int;
  return st;
}

void macro_rhs(const std::vector<MomentState>& states, const ModelSetup& setup,
               std::vector<MomentState>& out) {
  const std::size_t ns = states.size();
  out.resize(ns);

  if (setup.kind == ModelKind::alpp) {
    const AlppMoments am = derive_alpp(states[0], setup.alpp.delta_dof);
    const double a = setup.alpp.a_nu;
    const double T_mix = alpp_mix_temperature(am, setup.alpp);
    const double T_rel = alpp_relax_temperature(am, setup.alpp);
    MomentState& o = out[0];
    o = MomentState{};
    o.nu.assign(states[0].nu.size(), 0.0);
    o.s2v = a * (am.rho * (3.0 * T_mix + norm2(am.u)) - states[0].s2v);
    o.s2e = a * (am.rho * 0.5 * setup.alpp.delta_dof * T_rel - states[0].s2e);
    return;
  }

  const int d = setup.d;
  std::vector<MomentDerived> derived(ns);
  std::vector<GaussianShape> shape(ns);
  std::vector<double> densities(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    derived[k] = derive_moments(states[k], setup.species[k].mass, d,
                                setup.species[k].internal_dof);
    shape[k] = shape_of(states[k], derived[k], states[k].theta);
    densities[k] = states[k].n;
  }

  std::vector<double> a_self, a_cross;
  collision_rates(setup, densities, a_self, a_cross);

  ExchangePair exch;
  const bool mixture = is_mixture(setup.kind);
  if (mixture)
    exch = exchange_coefficients(shape[0], shape[1], setup.species[0], setup.species[1],
                                 setup.mix, d);

  for (std::size_t k = 0; k < ns; ++k) {
    const SpeciesSpec& spk = setup.species[k];
    const int l = spk.internal_dof;
    const MomentState& st = states[k];
    const MomentDerived& de = derived[k];
    MomentState& o = out[k];
    o = MomentState{};
    o.nu.assign(st.nu.size(), 0.0);
    o.neta.assign(st.neta.size(), 0.0);

    // Self target shares every moment entering nu, neta; only the second
    // moments move: int |v|^2 M_k = n (d Lambda/m + |u|^2).
    o.s2v = a_self[k] * (gauss_s2v(shape[k], spk.mass, d) - st.s2v);
    if (l > 0) o.s2e = a_self[k] * (gauss_s2e(shape[k], spk.mass, l) - st.s2e);

    double recenter = 0.0;
    if (mixture) {
      const GaussianShape& cross = k == 0 ? exch.g12 : exch.g21;
      for (std::size_t i = 0; i < st.nu.size(); ++i)
        o.nu[i] += a_cross[k] * st.n * (cross.u[i] - de.u[i]);
      double q = 0.0;
      for (std::size_t i = 0; i < st.neta.size(); ++i) {
        const double dm = cross.eta_bar[i] - de.eta_bar[i];
        o.neta[i] += a_cross[k] * st.n * dm;
        q += dm * dm;
      }
      o.s2v += a_cross[k] * (gauss_s2v(cross, spk.mass, d) - st.s2v);
      if (l > 0) {
        o.s2e += a_cross[k] * (gauss_s2e(cross, spk.mass, l) - st.s2e);
        recenter = a_cross[k] * spk.mass / l * q;
      }
    }

    if (l == 0) continue;
    const double r = stage_rate(a_self[k], spk.z, d, l);
    switch (setup.kind) {
      case ModelKind::bip_one:
        o.theta = r * (de.lambda - st.theta);
        break;
      case ModelKind::kpp_one:
        o.theta = r * (de.lambda - st.theta) + a_self[k] * (st.theta - de.T_r);
        break;
      case ModelKind::kpp_mix: {
        const double theta_cross = k == 0 ? exch.g12.theta : exch.g21.theta;
        o.theta = r * (de.lambda - st.theta) + a_self[k] * (st.theta - de.T_r) +
                  a_cross[k] * (theta_cross - de.T_r) + recenter;
        break;
      }
      case ModelKind::new_mix: {
        const double T_cross = k == 0 ? exch.T12 : exch.T21;
        o.theta = r * (de.lambda - st.theta) + a_cross[k] * (T_cross - st.theta) + recenter;
        break;
      }
      case ModelKind::alpp:
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Flat packing for the integrator and the linearization.

namespace {

void pack(const std::vector<MomentState>& states, const ModelSetup& setup,
          std::vector<double>& x) {
  x.clear();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const MomentState& st = states[k];
    x.push_back(st.n);
    x.insert(x.end(), st.nu.begin(), st.nu.end());
    x.insert(x.end(), st.neta.begin(), st.neta.end());
    x.push_back(st.s2v);
    if (setup.kind == ModelKind::alpp) {
      x.push_back(st.s2e);
    } else if (setup.species[k].internal_dof > 0) {
      x.push_back(st.s2e);
      x.push_back(st.theta);
    }
  }
}

void unpack(const std::vector<double>& x, const ModelSetup& setup,
            std::vector<MomentState>& states) {
  std::size_t i = 0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    MomentState& st = states[k];
    st.n = x[i++];
    for (auto& v : st.nu) v = x[i++];
    for (auto& v : st.neta) v = x[i++];
    st.s2v = x[i++];
    if (setup.kind == ModelKind::alpp) {
      st.s2e = x[i++];
    } else if (setup.species[k].internal_dof > 0) {
      st.s2e = x[i++];
      st.theta = x[i++];
    }
  }
}

}  // namespace

void oracle_evolve(std::vector<MomentState>& states, const ModelSetup& setup, double dt_total,
                   int substeps) {
  if (substeps < 1) substeps = 1;
  const double dt = dt_total / substeps;
  std::vector<MomentState> work = states, deriv;
  std::vector<double> x, k1, k2, k3, k4, tmp;
  pack(states, setup, x);

  auto eval = [&](const std::vector<double>& xin, std::vector<double>& dxdt) {
    unpack(xin, setup, work);
    macro_rhs(work, setup, deriv);
    pack(deriv, setup, dxdt);
  };

  for (int s = 0; s < substeps; ++s) {
    eval(x, k1);
    tmp.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    eval(tmp, k2);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    eval(tmp, k3);
    for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i] + dt * k3[i];
    eval(tmp, k4);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  unpack(x, setup, states);
}

std::vector<double> oracle_total_momentum(const std::vector<MomentState>& states,
                                          const ModelSetup& setup) {
  const std::size_t d = states[0].nu.size();
  std::vector<double> p(d, 0.0);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double mass = setup.kind == ModelKind::alpp ? 1.0 : setup.species[k].mass;
    for (std::size_t a = 0; a < d; ++a) p[a] += mass * states[k].nu[a];
  }
  return p;
}

double oracle_total_energy(const std::vector<MomentState>& states, const ModelSetup& setup) {
  double e = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (setup.kind == ModelKind::alpp) {
      e += 0.5 * states[k].s2v + states[k].s2e;
    } else {
      e += 0.5 * setup.species[k].mass * (states[k].s2v + states[k].s2e);
    }
  }
  return e;
}

RateSpectrum predict_linear_rates(const std::vector<MomentState>& states,
                                  const ModelSetup& setup) {
  std::vector<MomentState> work = states, deriv;
  std::vector<double> x0;
  pack(states, setup, x0);
  const std::size_t n = x0.size();

  auto eval = [&](const std::vector<double>& xin, std::vector<double>& dxdt) {
    unpack(xin, setup, work);
    macro_rhs(work, setup, deriv);
    pack(deriv, setup, dxdt);
  };

  double scale = 1.0;
  for (double v : x0) scale = std::max(scale, std::abs(v));
  const double h = 1e-6 * scale;

  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> xp, xm, fp, fm;
  for (std::size_t j = 0; j < n; ++j) {
    xp = x0;
    xm = x0;
    xp[j] += h;
    xm[j] -= h;
    eval(xp, fp);
    eval(xm, fm);
    for (std::size_t i = 0; i < n; ++i)
      J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (fp[i] - fm[i]) / (2.0 * h);
  }

  RateSpectrum spec;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
  if (solver.info() != Eigen::Success) {
    spec.singular_jacobian = true;
    return spec;
  }
  const auto& ev = solver.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev[i]));
  spec.zero_tolerance = 1e-8 * std::max(1.0, radius);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const std::complex<double> lam(ev[i].real(), ev[i].imag());
    if (std::abs(lam) < spec.zero_tolerance) {
      spec.conserved.push_back(lam);
    } else {
      spec.decaying.push_back(lam);
    }
  }
  std::sort(spec.decaying.begin(), spec.decaying.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            });
  return spec;
}

double slowest_decay_rate(const RateSpectrum& spec) {
  if (spec.decaying.empty()) throw DegenerateSeries("no decaying modes in the spectrum");
  return -spec.decaying.back().real();
}

}  // namespace pbgk
