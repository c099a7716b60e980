#ifndef PBGK_MAXWELLIAN_HPP
#define PBGK_MAXWELLIAN_HPP

#include <vector>

#include "pbgk/field.hpp"
#include "pbgk/macro.hpp"
#include "pbgk/species.hpp"

namespace pbgk {

// Parameters of a product Gaussian on a species grid:
//   n / ((2 pi lambda/m)^{d/2} (2 pi theta/m)^{l/2})
//     * exp(-m|v-u|^2 / (2 lambda) - m|eta-eta_bar|^2 / (2 theta)).
// lambda is the velocity temperature, theta the internal one; theta is ignored
// when the grid has no internal axes.
struct GaussianShape {
  double n = 0.0;
  std::vector<double> u;
  std::vector<double> eta_bar;
  double lambda = 1.0;
  double theta = 1.0;
};

// Shape of the species Maxwellian: moments (n, u, eta_bar) of f, velocity
// temperature from the internal-energy constraint at the given theta.
GaussianShape maxwellian_shape(const MacroState& m, double theta, int d, int l);

// Shape with both temperature blocks set to T = (d lambda + l theta)/(d + l).
GaussianShape single_temperature_shape(const GaussianShape& g, int d, int l);

// Peak value (at v = u, eta = eta_bar) and closed-form entropy int M ln M.
double gaussian_peak(const GaussianShape& g, double mass, int d, int l);
double gaussian_entropy(const GaussianShape& g, double mass, int d, int l);

// Closed-form cross entropy int g ln m for two product Gaussians of the same
// species (same mass and axes). ln m is quadratic, so the integral needs only
// the first two moments of g; gaussian_cross_entropy(g, g, ...) equals
// gaussian_entropy(g, ...).
double gaussian_cross_entropy(const GaussianShape& g, const GaussianShape& m, double mass,
                              int d, int l);

// out[cell] += scale * M(cell). The Gaussian separates over axes, so each axis
// contributes a 1D factor array (each factor exponentiated from its log, so no
// intermediate can overflow; deep-tail products underflow harmlessly to zero).
void accumulate_gaussian(std::vector<double>& out, double scale, const GaussianShape& g,
                         double mass, const PhaseGrid& grid);

DistributionField sample_gaussian(const GaussianShape& g, double mass, GridPtr grid);

// Interspecies relaxation targets for an ordered species pair. g12 keeps the
// density of species 1 and mixed velocity/internal parameters; T12 is the
// matching single temperature (d lambda12 + l1 theta12)/(d + l1).
struct ExchangePair {
  GaussianShape g12;
  double T12 = 0.0;
  GaussianShape g21;
  double T21 = 0.0;
};

// Mixed means and temperatures. Internal means combine in the global internal
// variable space (species slots embed their local vectors) and project back to
// each species' own slots. Throws NonpositiveExchangeTemperature if any mixed
// temperature fails to be positive.
ExchangePair exchange_coefficients(const GaussianShape& g1, const GaussianShape& g2,
                                   const SpeciesSpec& s1, const SpeciesSpec& s2,
                                   const MixtureParams& p, int d);

}  // namespace pbgk

#endif
