#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "doctest.h"

#include "pbgk/diagnostics.hpp"
#include "pbgk/macro.hpp"
#include "pbgk/model.hpp"
#include "pbgk/moment_oracle.hpp"

namespace {

pbgk::ModelSetup one_species_setup(pbgk::ModelKind kind, double nu, double z) {
  pbgk::ModelSetup setup;
  setup.kind = kind;
  setup.law = pbgk::FrequencyLaw::constant_rate;
  setup.species.resize(1);
  setup.species[0].internal_dof = 1;
  setup.species[0].slots = {0};
  setup.species[0].nu_self = nu;
  setup.species[0].z = z;
  return setup;
}

pbgk::ModelSetup mixture_setup(pbgk::ModelKind kind) {
  pbgk::ModelSetup setup;
  setup.kind = kind;
  setup.law = pbgk::FrequencyLaw::constant_rate;
  setup.species.resize(2);
  setup.species[0].mass = 1.0;
  setup.species[1].mass = 1.5;
  for (auto& sp : setup.species) {
    sp.internal_dof = 1;
    sp.slots = {0};
  }
  setup.species[0].nu_self = 1.0;
  setup.species[0].nu_cross = 0.5;
  setup.species[0].z = 1.3;
  setup.species[1].nu_self = 1.1;
  setup.species[1].nu_cross = 0.4;
  setup.species[1].z = 0.9;
  setup.mix.delta = setup.mix.beta = setup.mix.alpha = 0.5;
  setup.mix.gamma = 0.03;
  setup.mix.gamma_tilde = 0.02;
  return setup;
}

pbgk::MomentState gas_state(double n, std::vector<double> u, double eta, double T_t, double T_r,
                            double theta, double mass) {
  pbgk::MacroState m;
  m.n = n;
  m.u = std::move(u);
  m.eta_bar = {eta};
  m.T_t = T_t;
  m.T_r = T_r;
  return pbgk::moments_from_macro(m, theta, mass);
}

double spectrum_contains(const pbgk::RateSpectrum& spec, double rate) {
  double best = 1e300;
  for (const std::complex<double>& lam : spec.decaying)
    best = std::min(best, std::abs(-lam.real() - rate) + std::abs(lam.imag()));
  return best;
}

}  // namespace

TEST_CASE("scalar-energy moment flow relaxes the temperature gap at the coupling rate") {
  pbgk::ModelSetup setup;
  setup.kind = pbgk::ModelKind::alpp;
  setup.species.resize(1);
  setup.species[0].internal_dof = 1;
  setup.species[0].slots = {0};
  setup.alpp.delta_dof = 1.0;
  setup.alpp.a_nu = 2.0;
  setup.alpp.theta = 0.25;
  setup.validate();

  pbgk::AlppMoments m0;
  m0.rho = 1.0;
  m0.u = {0.2, 0.0, 0.0};
  m0.T_tr = 1.4;
  m0.T_int = 0.6;
  m0.T_equ = (3.0 * m0.T_tr + setup.alpp.delta_dof * m0.T_int) / (3.0 + setup.alpp.delta_dof);
  std::vector<pbgk::MomentState> st = {pbgk::moments_from_alpp(m0, setup.alpp.delta_dof)};

  const double e0 = pbgk::oracle_total_energy(st, setup);
  const std::vector<double> p0 = pbgk::oracle_total_momentum(st, setup);
  std::vector<double> times, gaps;
  const double h = 0.02;
  for (int i = 0; i <= 200; ++i) {
    const pbgk::AlppMoments m = pbgk::derive_alpp(st[0], setup.alpp.delta_dof);
    times.push_back(i * h);
    gaps.push_back(std::abs(m.T_tr - m.T_equ));
    if (i < 200) pbgk::oracle_evolve(st, setup, h, 2);
  }

  // dT_tr/dt = a theta (T_equ - T_tr) with T_equ conserved: exact rate 0.5.
  const pbgk::DecayFit fit = pbgk::fit_decay_rate(times, gaps);
  CHECK(std::abs(fit.rate - setup.alpp.theta * setup.alpp.a_nu) < 1e-6);
  CHECK(fit.r2 > 0.999999);

  const pbgk::AlppMoments mend = pbgk::derive_alpp(st[0], setup.alpp.delta_dof);
  CHECK(std::abs(mend.T_equ - m0.T_equ) < 1e-12);
  CHECK(std::abs(pbgk::oracle_total_energy(st, setup) - e0) < 1e-12);
  for (int a = 0; a < 3; ++a)
    CHECK(std::abs(pbgk::oracle_total_momentum(st, setup)[a] - p0[a]) < 1e-12);
  CHECK(std::abs(st[0].n - 1.0) < 1e-14);
}

TEST_CASE("one-species temperature spectra at equilibrium match the closed forms") {
  SUBCASE("algebraic relaxation-temperature stage: real rates a and a/z") {
    // nu = 1.5, n = 2 under the constant-rate law: a = 3; z = 4.
    pbgk::ModelSetup setup = one_species_setup(pbgk::ModelKind::bip_one, 1.5, 4.0);
    setup.validate();
    std::vector<pbgk::MomentState> st = {gas_state(2.0, {0.1, 0.0, 0.0}, 0.05, 1.2, 1.2, 1.2, 1.0)};
    const pbgk::RateSpectrum spec = pbgk::predict_linear_rates(st, setup);
    REQUIRE(!spec.singular_jacobian);
    CHECK(spec.decaying.size() == 2);
    CHECK(spec.conserved.size() == 6);  // n, three u, eta, energy
    CHECK(spectrum_contains(spec, 3.0) < 1e-6);
    CHECK(spectrum_contains(spec, 0.75) < 1e-6);
    CHECK(pbgk::slowest_decay_rate(spec) == doctest::Approx(0.75).epsilon(1e-6));
  }

  SUBCASE("coupled stage: complex pair with real part a/(2z), modulus a/sqrt(z)") {
    pbgk::ModelSetup setup = one_species_setup(pbgk::ModelKind::kpp_one, 1.0, 1.0);
    setup.validate();
    std::vector<pbgk::MomentState> st = {gas_state(1.0, {0.0, 0.1, 0.0}, 0.0, 0.9, 0.9, 0.9, 1.0)};
    const pbgk::RateSpectrum spec = pbgk::predict_linear_rates(st, setup);
    REQUIRE(!spec.singular_jacobian);
    CHECK(spec.decaying.size() == 2);
    for (const std::complex<double>& lam : spec.decaying) {
      CHECK(lam.real() == doctest::Approx(-0.5).epsilon(1e-6));
      CHECK(std::abs(lam) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(pbgk::slowest_decay_rate(spec) == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("fitted trajectory decay matches the predicted slowest rate") {
  // z = 0.2 < 1/4 keeps both temperature eigenvalues real:
  // lambda^2 + (a/z) lambda + a^2/z = 0 with a = 1 gives (5 -+ sqrt(5))/2.
  pbgk::ModelSetup setup = one_species_setup(pbgk::ModelKind::kpp_one, 1.0, 0.2);
  setup.validate();
  const double slow = (5.0 - std::sqrt(5.0)) / 2.0;

  std::vector<pbgk::MomentState> st = {gas_state(1.0, {0.1, 0.0, 0.0}, 0.0, 1.05, 0.93, 0.99, 1.0)};
  const pbgk::RateSpectrum spec = pbgk::predict_linear_rates(st, setup);
  REQUIRE(!spec.singular_jacobian);
  CHECK(pbgk::slowest_decay_rate(spec) == doctest::Approx(slow).epsilon(1e-6));

  // March past the fast transient, then fit the gap to the common temperature.
  pbgk::oracle_evolve(st, setup, 2.0, 400);
  std::vector<double> times, gaps;
  const double h = 0.02;
  for (int i = 0; i <= 150; ++i) {
    const pbgk::MomentDerived de = pbgk::derive_moments(st[0], 1.0, 3, 1);
    times.push_back(2.0 + i * h);
    gaps.push_back(std::abs(st[0].theta - de.T));
    if (i < 150) pbgk::oracle_evolve(st, setup, h, 4);
  }
  const pbgk::DecayFit fit = pbgk::fit_decay_rate(times, gaps);
  CHECK(std::abs(fit.rate - slow) < 0.02 * slow);
  CHECK(fit.r2 > 0.999);
}

TEST_CASE("mixture moment flow conserves the collision invariants") {
  pbgk::ModelSetup setup = mixture_setup(pbgk::ModelKind::new_mix);
  setup.validate();

  std::vector<pbgk::MomentState> st = {
      gas_state(1.0, {0.4, 0.0, -0.1}, 0.3, 1.2, 0.7, 0.9, setup.species[0].mass),
      gas_state(0.6, {-0.3, 0.2, 0.0}, -0.2, 0.8, 1.3, 1.1, setup.species[1].mass)};
  const std::vector<double> p0 = pbgk::oracle_total_momentum(st, setup);
  const double e0 = pbgk::oracle_total_energy(st, setup);
  const double n10 = st[0].n, n20 = st[1].n;

  pbgk::oracle_evolve(st, setup, 2.0, 200);

  const std::vector<double> p1 = pbgk::oracle_total_momentum(st, setup);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(p1[a] - p0[a]) < 1e-12);
  CHECK(std::abs(pbgk::oracle_total_energy(st, setup) - e0) < 1e-12);
  CHECK(std::abs(st[0].n - n10) < 1e-14);
  CHECK(std::abs(st[1].n - n20) < 1e-14);

  SUBCASE("joint equilibrium is a fixed point of the moment flow") {
    const double T = 1.1;
    std::vector<pbgk::MomentState> eq = {
        gas_state(1.0, {0.15, 0.0, 0.0}, 0.2, T, T, T, setup.species[0].mass),
        gas_state(0.6, {0.15, 0.0, 0.0}, 0.2, T, T, T, setup.species[1].mass)};
    std::vector<pbgk::MomentState> dm;
    pbgk::macro_rhs(eq, setup, dm);
    for (const pbgk::MomentState& o : dm) {
      CHECK(std::abs(o.n) < 1e-12);
      for (double v : o.nu) CHECK(std::abs(v) < 1e-12);
      for (double v : o.neta) CHECK(std::abs(v) < 1e-12);
      CHECK(std::abs(o.s2v) < 1e-12);
      CHECK(std::abs(o.s2e) < 1e-12);
      CHECK(std::abs(o.theta) < 1e-12);
    }
  }
}

TEST_CASE("raw-moment packing round trips through the derived quantities") {
  SUBCASE("gas state") {
    pbgk::MacroState m;
    m.n = 1.2;
    m.u = {0.3, -0.1, 0.0};
    m.eta_bar = {0.2};
    m.T_t = 1.1;
    m.T_r = 0.8;
    const double mass = 1.7, theta = 0.9;
    const pbgk::MomentState st = pbgk::moments_from_macro(m, theta, mass);
    const pbgk::MomentDerived de = pbgk::derive_moments(st, mass, 3, 1);
    for (int a = 0; a < 3; ++a) CHECK(de.u[a] == doctest::Approx(m.u[a]).epsilon(1e-14));
    CHECK(de.eta_bar[0] == doctest::Approx(m.eta_bar[0]).epsilon(1e-14));
    CHECK(de.T_t == doctest::Approx(m.T_t).epsilon(1e-13));
    CHECK(de.T_r == doctest::Approx(m.T_r).epsilon(1e-13));
    CHECK(de.lambda ==
          doctest::Approx(pbgk::lambda_from_constraint(m.T_t, m.T_r, theta, 3, 1)).epsilon(1e-13));
    CHECK(de.T == doctest::Approx(pbgk::equilibrium_temperature(de.lambda, theta, 3, 1))
                      .epsilon(1e-13));
  }

  SUBCASE("scalar-energy state") {
    pbgk::AlppMoments m;
    m.rho = 0.8;
    m.u = {0.1, 0.2, -0.3};
    m.T_tr = 1.3;
    m.T_int = 0.5;
    m.T_equ = (3.0 * m.T_tr + 1.0 * m.T_int) / 4.0;
    const pbgk::MomentState st = pbgk::moments_from_alpp(m, 1.0);
    const pbgk::AlppMoments back = pbgk::derive_alpp(st, 1.0);
    CHECK(back.rho == doctest::Approx(m.rho).epsilon(1e-14));
    for (int a = 0; a < 3; ++a) CHECK(back.u[a] == doctest::Approx(m.u[a]).epsilon(1e-14));
    CHECK(back.T_tr == doctest::Approx(m.T_tr).epsilon(1e-13));
    CHECK(back.T_int == doctest::Approx(m.T_int).epsilon(1e-13));
    CHECK(back.T_equ == doctest::Approx(m.T_equ).epsilon(1e-13));
  }
}
