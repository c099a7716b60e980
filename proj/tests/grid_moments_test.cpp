#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"

#include "pbgk/errors.hpp"
#include "pbgk/field.hpp"
#include "pbgk/grid.hpp"
#include "pbgk/macro.hpp"
#include "pbgk/maxwellian.hpp"

namespace {

pbgk::GridPtr make_grid(int d, int l, int vp, int ip, double halfwidth) {
  std::vector<pbgk::Axis> vel, internal;
  for (int a = 0; a < d; ++a) vel.push_back(pbgk::symmetric_axis(0.0, halfwidth, vp));
  for (int i = 0; i < l; ++i) internal.push_back(pbgk::symmetric_axis(0.0, halfwidth, ip));
  return std::make_shared<const pbgk::PhaseGrid>(std::move(vel), std::move(internal));
}

}  // namespace

TEST_CASE("axis midpoints and grid layout") {
  const pbgk::Axis ax = pbgk::symmetric_axis(1.0, 2.0, 4);
  CHECK(ax.lo == doctest::Approx(-1.0));
  CHECK(ax.hi == doctest::Approx(3.0));
  CHECK(ax.spacing() == doctest::Approx(1.0));
  CHECK(ax.center(0) == doctest::Approx(-0.5));
  CHECK(ax.center(3) == doctest::Approx(2.5));

  const pbgk::GridPtr g = make_grid(2, 1, 4, 3, 2.0);
  CHECK(g->velocity_dim() == 2);
  CHECK(g->internal_dim() == 1);
  CHECK(g->cells() == 4u * 4u * 3u);
  CHECK(g->cell_volume() == doctest::Approx(1.0 * 1.0 * (4.0 / 3.0)));
  CHECK(g->is_velocity_axis(1));
  CHECK(!g->is_velocity_axis(2));
  // decode inverts the row-major flattening.
  for (std::size_t flat : {0ul, 7ul, 47ul}) {
    const std::vector<int> idx = g->decode(flat);
    std::size_t back = 0;
    for (int a = 0; a < g->dim(); ++a)
      back += static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]) * g->stride(a);
    CHECK(back == flat);
  }
}

TEST_CASE("moments agree with a direct nested-loop reference") {
  const int d = 3, l = 1;
  const double mass = 1.7;
  pbgk::GaussianShape shape;
  shape.n = 0.8;
  shape.u = {0.3, -0.2, 0.1};
  shape.eta_bar = {0.25};
  shape.lambda = 1.4;
  shape.theta = 0.9;
  const double sigma = std::sqrt(1.4 / mass);
  const pbgk::GridPtr g = make_grid(d, l, 20, 16, 7.5 * sigma + 0.35);
  const pbgk::DistributionField f = pbgk::sample_gaussian(shape, mass, g);

  // Reference moments with plain summation over decoded cells.
  const double vol = g->cell_volume();
  double n = 0.0;
  std::vector<double> mean(4, 0.0);
  for (std::size_t c = 0; c < f.size(); ++c) {
    const std::vector<int> idx = g->decode(c);
    n += f.value[c] * vol;
    for (int a = 0; a < 4; ++a)
      mean[static_cast<std::size_t>(a)] +=
          g->axis(a).center(idx[static_cast<std::size_t>(a)]) * f.value[c] * vol;
  }
  for (double& m : mean) m /= n;
  double s_t = 0.0, s_r = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    const std::vector<int> idx = g->decode(c);
    for (int a = 0; a < 3; ++a) {
      const double dv =
          g->axis(a).center(idx[static_cast<std::size_t>(a)]) - mean[static_cast<std::size_t>(a)];
      s_t += dv * dv * f.value[c] * vol;
    }
    const double de = g->axis(3).center(idx[3]) - mean[3];
    s_r += de * de * f.value[c] * vol;
  }
  const double T_t_ref = mass * s_t / (d * n);
  const double T_r_ref = mass * s_r / (l * n);

  const pbgk::MacroState m = pbgk::compute_moments(f, mass);
  CHECK(m.n == doctest::Approx(n).epsilon(1e-13));
  for (int a = 0; a < d; ++a)
    CHECK(m.u[static_cast<std::size_t>(a)] ==
          doctest::Approx(mean[static_cast<std::size_t>(a)]).epsilon(1e-12));
  CHECK(m.eta_bar[0] == doctest::Approx(mean[3]).epsilon(1e-12));
  CHECK(m.T_t == doctest::Approx(T_t_ref).epsilon(1e-12));
  CHECK(m.T_r == doctest::Approx(T_r_ref).epsilon(1e-12));

  // And the discrete moments match the sampled parameters to quadrature error.
  CHECK(m.n == doctest::Approx(shape.n).epsilon(1e-9));
  CHECK(m.u[0] == doctest::Approx(shape.u[0]).epsilon(1e-9));
  CHECK(m.T_t == doctest::Approx(shape.lambda).epsilon(1e-9));
  CHECK(m.T_r == doctest::Approx(shape.theta).epsilon(1e-9));
}

TEST_CASE("temperature constraint and equilibrium temperature") {
  // Lambda = T_t + (l/d)(T_r - Theta) and T = (d Lambda + l Theta)/(d + l).
  CHECK(pbgk::lambda_from_constraint(1.5, 1.0, 0.5, 3, 1) == doctest::Approx(5.0 / 3.0));
  CHECK(pbgk::equilibrium_temperature(5.0 / 3.0, 0.5, 3, 1) == doctest::Approx(11.0 / 8.0));
  CHECK(pbgk::lambda_from_constraint(2.0, 1.0, 1.0, 3, 0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pbgk::lambda_from_constraint(0.5, 0.1, 10.0, 3, 3), pbgk::NonpositiveLambda);
}

TEST_CASE("vacuum states are rejected") {
  const pbgk::GridPtr g = make_grid(3, 0, 6, 0, 3.0);
  pbgk::DistributionField f(g);
  CHECK_THROWS_AS(pbgk::compute_moments(f, 1.0), pbgk::VacuumState);
}

TEST_CASE("pressure tensor of an isotropic Maxwellian") {
  const double mass = 2.0;
  pbgk::GaussianShape shape;
  shape.n = 1.0;
  shape.u = {0.4, 0.0, -0.3};
  shape.lambda = 1.1;
  const double sigma = std::sqrt(shape.lambda / mass);
  const pbgk::GridPtr g = make_grid(3, 0, 24, 0, 7.4 * sigma + 0.4);
  const pbgk::DistributionField f = pbgk::sample_gaussian(shape, mass, g);
  const std::vector<double> p = pbgk::pressure_tensor(f, mass);
  REQUIRE(p.size() == 9u);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? shape.n * shape.lambda : 0.0;
      CHECK(std::abs(p[static_cast<std::size_t>(3 * i + j)] - expected) < 1e-8);
    }
}
