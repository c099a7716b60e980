#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"

#include "pbgk/diagnostics.hpp"
#include "pbgk/errors.hpp"
#include "pbgk/grid.hpp"
#include "pbgk/maxwellian.hpp"

namespace {

pbgk::GridPtr make_grid(int d, int l, int vp, int ip, double halfwidth) {
  std::vector<pbgk::Axis> vel, internal;
  for (int a = 0; a < d; ++a) vel.push_back(pbgk::symmetric_axis(0.0, halfwidth, vp));
  for (int i = 0; i < l; ++i) internal.push_back(pbgk::symmetric_axis(0.0, halfwidth, ip));
  return std::make_shared<const pbgk::PhaseGrid>(std::move(vel), std::move(internal));
}

}  // namespace

TEST_CASE("Gaussian peak value") {
  // Unit shape in d = 3, l = 2: peak is (2 pi)^(-5/2), written symbolically.
  pbgk::GaussianShape g;
  g.n = 1.0;
  g.u = {0.0, 0.0, 0.0};
  g.eta_bar = {0.0, 0.0};
  g.lambda = 1.0;
  g.theta = 1.0;
  CHECK(pbgk::gaussian_peak(g, 1.0, 3, 2) ==
        doctest::Approx(std::pow(2.0 * M_PI, -2.5)).epsilon(1e-15));

  // Scaling with mass and temperatures.
  g.lambda = 1.7;
  g.theta = 0.6;
  g.n = 2.3;
  const double m = 1.9;
  const double expected = g.n * std::pow(m / (2.0 * M_PI * g.lambda), 1.5) *
                          std::pow(m / (2.0 * M_PI * g.theta), 1.0);
  CHECK(pbgk::gaussian_peak(g, m, 3, 2) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("closed-form Gaussian entropies match quadrature") {
  pbgk::GaussianShape g;
  g.n = 0.9;
  g.u = {0.2, -0.1, 0.0};
  g.eta_bar = {0.3};
  g.lambda = 1.2;
  g.theta = 0.7;
  const double mass = 1.4;
  const double sigma = std::sqrt(g.lambda / mass);
  const pbgk::GridPtr grid = make_grid(3, 1, 24, 20, 7.5 * sigma + 0.35);
  const pbgk::DistributionField f = pbgk::sample_gaussian(g, mass, grid);

  CHECK(pbgk::entropy(f).value ==
        doctest::Approx(pbgk::gaussian_entropy(g, mass, 3, 1)).epsilon(1e-9));
  CHECK(pbgk::gaussian_cross_entropy(g, g, mass, 3, 1) ==
        doctest::Approx(pbgk::gaussian_entropy(g, mass, 3, 1)).epsilon(1e-14));

  // Discrete mass of the sampled field matches the shape density.
  double n = 0.0;
  for (double v : f.value) n += v;
  n *= grid->cell_volume();
  CHECK(n == doctest::Approx(g.n).epsilon(1e-10));
}

TEST_CASE("accumulate adds a scaled Gaussian") {
  pbgk::GaussianShape g;
  g.n = 1.1;
  g.u = {0.1, 0.0, -0.2};
  g.eta_bar = {};
  g.lambda = 0.8;
  const pbgk::GridPtr grid = make_grid(3, 0, 12, 0, 6.0);
  const pbgk::DistributionField f = pbgk::sample_gaussian(g, 1.0, grid);
  std::vector<double> out(grid->cells(), 0.0);
  pbgk::accumulate_gaussian(out, 2.0, g, 1.0, *grid);
  for (std::size_t c = 0; c < out.size(); ++c)
    CHECK(out[c] == doctest::Approx(2.0 * f.value[c]).epsilon(1e-14));
}

TEST_CASE("single-temperature shape uses the dof-weighted average") {
  pbgk::GaussianShape g;
  g.n = 1.0;
  g.u = {0.0, 0.0, 0.0};
  g.eta_bar = {0.1};
  g.lambda = 5.0 / 3.0;
  g.theta = 0.5;
  const pbgk::GaussianShape s = pbgk::single_temperature_shape(g, 3, 1);
  CHECK(s.lambda == doctest::Approx(11.0 / 8.0).epsilon(1e-15));
  CHECK(s.theta == doctest::Approx(11.0 / 8.0).epsilon(1e-15));
  CHECK(s.n == g.n);
  CHECK(s.eta_bar == g.eta_bar);
}

TEST_CASE("exchange coefficients on a hand-computed example") {
  // d = 3, equal unit masses, l1 = l2 = 1, nu12 = nu21 = 1 (so eps = 1),
  // delta = beta = alpha = 1/2, no drift heating.
  pbgk::SpeciesSpec s1, s2;
  s1.mass = s2.mass = 1.0;
  s1.internal_dof = s2.internal_dof = 1;
  s1.slots = s2.slots = {0};
  s1.nu_cross = s2.nu_cross = 1.0;
  pbgk::MixtureParams p;
  p.delta = p.beta = p.alpha = 0.5;
  p.gamma = p.gamma_tilde = 0.0;

  pbgk::GaussianShape g1, g2;
  g1.n = 2.0;
  g1.u = {1.0, 0.0, 0.0};
  g1.eta_bar = {0.0};
  g1.lambda = 2.0;
  g1.theta = 2.0;
  g2.n = 1.0;
  g2.u = {0.0, 0.0, 0.0};
  g2.eta_bar = {0.0};
  g2.lambda = 1.0;
  g2.theta = 1.0;

  const pbgk::ExchangePair ex = pbgk::exchange_coefficients(g1, g2, s1, s2, p, 3);
  // Velocity means: u12 = delta-mix, u21 carries the momentum-balancing shift.
  CHECK(ex.g12.u[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ex.g21.u[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(ex.g12.u[1]) < 1e-15);
  CHECK(std::abs(ex.g21.u[2]) < 1e-15);
  // Temperatures: Lambda12 = (2+1)/2, Theta12 = Theta21 = (2+1)/2, and
  // Lambda21 picks up the drift-heating balance term (1/3)(1/2)(1)|du|^2.
  CHECK(ex.g12.lambda == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(ex.g12.theta == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(ex.g21.lambda == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(ex.g21.theta == doctest::Approx(1.5).epsilon(1e-14));
  // Single temperatures (d lambda + l theta)/(d + l).
  CHECK(ex.T12 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(ex.T21 == doctest::Approx(1.625).epsilon(1e-14));
  // Densities stay with their species.
  CHECK(ex.g12.n == doctest::Approx(g1.n));
  CHECK(ex.g21.n == doctest::Approx(g2.n));

  // Exact antisymmetry of momentum and total-energy exchange at these values:
  // a12 n1 (u12 - u1) + a21 n2 (u21 - u2) with a12 = nu12 n2, a21 = nu21 n1.
  const double a12 = s1.nu_cross * g2.n, a21 = s2.nu_cross * g1.n;
  CHECK(std::abs(a12 * g1.n * (ex.g12.u[0] - g1.u[0]) +
                 a21 * g2.n * (ex.g21.u[0] - g2.u[0])) < 1e-14);
  const double e1 = 0.5 * a12 * g1.n *
                    (3.0 * (ex.g12.lambda - g1.lambda) +
                     (ex.g12.u[0] * ex.g12.u[0] - g1.u[0] * g1.u[0]) +
                     (ex.g12.theta - g1.theta));
  const double e2 = 0.5 * a21 * g2.n *
                    (3.0 * (ex.g21.lambda - g2.lambda) +
                     (ex.g21.u[0] * ex.g21.u[0] - g2.u[0] * g2.u[0]) +
                     (ex.g21.theta - g2.theta));
  CHECK(std::abs(e1 + e2) < 1e-13);
}

TEST_CASE("drift-heating bounds separate admissible from inadmissible") {
  pbgk::SpeciesSpec s1, s2;
  s1.mass = 1.0;
  s2.mass = 1.5;
  s1.internal_dof = s2.internal_dof = 1;
  s1.slots = s2.slots = {0};
  s1.nu_cross = 0.5;
  s2.nu_cross = 0.4;
  pbgk::MixtureParams p;
  p.delta = p.beta = p.alpha = 0.5;
  const double eps = pbgk::epsilon_ratio(s1.nu_cross, s2.nu_cross);
  const double gmax = pbgk::gamma_upper_bound(p, s1.mass, s2.mass, eps, 3);
  const double gtmax = pbgk::gamma_tilde_upper_bound(p, s1.mass, s2.mass, eps, 1);
  CHECK(gmax > 0.0);
  CHECK(gtmax > 0.0);

  p.gamma = 0.99 * gmax;
  p.gamma_tilde = 0.99 * gtmax;
  CHECK(pbgk::check_mixture_params(p, s1, s2, 3).ok());
  p.gamma = 1.01 * gmax;
  CHECK(!pbgk::check_mixture_params(p, s1, s2, 3).ok());
  p.gamma = 0.0;
  p.gamma_tilde = 1.01 * gtmax;
  CHECK(!pbgk::check_mixture_params(p, s1, s2, 3).ok());
}

TEST_CASE("frequency ratio requires a positive reverse frequency") {
  CHECK(pbgk::epsilon_ratio(0.5, 0.4) == doctest::Approx(1.25));
  CHECK_THROWS_AS(pbgk::epsilon_ratio(1.0, 0.0), pbgk::UndefinedEpsilon);
}
