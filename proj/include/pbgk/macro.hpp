#ifndef PBGK_MACRO_HPP
#define PBGK_MACRO_HPP

#include <vector>

#include "pbgk/field.hpp"

namespace pbgk {

// Macroscopic moments of a distribution on its own grid. Temperatures are in
// energy units; T_r is meaningful only when the grid has internal axes.
struct MacroState {
  double n = 0.0;
  std::vector<double> u;        // bulk velocity, one entry per velocity axis
  std::vector<double> eta_bar;  // mean internal variable, one entry per internal axis
  double T_t = 0.0;             // translational temperature
  double T_r = 0.0;             // internal temperature (l >= 1 only)
};

// Midpoint-rule moments with compensated summation; the variance pass runs
// against the freshly computed means. Throws VacuumState when the density is
// not positive.
MacroState compute_moments(const DistributionField& f, double mass);

// Pressure tensor m * int (v-u)(x)(v-u) f, row-major d x d. Computed on demand.
std::vector<double> pressure_tensor(const DistributionField& f, double mass);

// Velocity temperature from the internal-energy constraint
//   Lambda = T_t + (l/d) (T_r - Theta);
// reduces to T_t when l = 0. Throws NonpositiveLambda if the result is <= 0.
double lambda_from_constraint(double T_t, double T_r, double theta, int d, int l);

// Single equilibrium temperature T = (d Lambda + l Theta) / (d + l).
double equilibrium_temperature(double lambda, double theta, int d, int l);

}  // namespace pbgk

#endif
