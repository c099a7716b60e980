#ifndef PBGK_MOMENT_ORACLE_HPP
#define PBGK_MOMENT_ORACLE_HPP

#include <complex>
#include <vector>

#include "pbgk/macro.hpp"
#include "pbgk/model.hpp"

namespace pbgk {

// Raw-moment state of one species, the unknowns of the closed macroscopic
// system: density, first moments, uncentered second moments, and the
// relaxation temperature. The scalar-energy model stores the raw internal
// energy int I^(2/delta) f in s2e and has no theta.
struct MomentState {
  double n = 0.0;
  std::vector<double> nu;    // n u
  std::vector<double> neta;  // n eta_bar
  double s2v = 0.0;          // int |v|^2 f
  double s2e = 0.0;          // int |eta|^2 f
  double theta = 0.0;        // unused when the species has no internal axes
};

// Centered quantities of a raw-moment state.
struct MomentDerived {
  std::vector<double> u;
  std::vector<double> eta_bar;
  double T_t = 0.0;
  double T_r = 0.0;
  double lambda = 0.0;
  double T = 0.0;
};

MomentDerived derive_moments(const MomentState& st, double mass, int d, int l);
AlppMoments derive_alpp(const MomentState& st, double delta_dof);

// Raw-moment state matching a kinetic macro snapshot (mixture and two-stage
// one-species models) or a scalar-energy moment set.
MomentState moments_from_macro(const MacroState& m, double theta, double mass);
MomentState moments_from_alpp(const AlppMoments& m, double delta_dof);

// Time derivative of every raw moment under the model's relaxation dynamics.
// All Maxwellian moments enter through closed Gaussian identities; nothing is
// integrated on a grid, so this path is independent of the kinetic solver.
void macro_rhs(const std::vector<MomentState>& states, const ModelSetup& setup,
               std::vector<MomentState>& out);

// Advances the moment system in place with `substeps` classical RK4 steps.
void oracle_evolve(std::vector<MomentState>& states, const ModelSetup& setup, double dt_total,
                   int substeps);

// First integrals: total momentum (per velocity axis) and total energy
// sum_k m_k/2 (s2v + s2e); the scalar-energy model counts s2e unweighted.
std::vector<double> oracle_total_momentum(const std::vector<MomentState>& states,
                                          const ModelSetup& setup);
double oracle_total_energy(const std::vector<MomentState>& states, const ModelSetup& setup);

// Spectrum of the linearized moment system at the given state. Eigenvalues
// with |lambda| below zero_tolerance are the conserved directions and are
// reported separately; the rest are sorted by real part (most negative
// first). singular_jacobian flags an eigensolver failure.
struct RateSpectrum {
  std::vector<std::complex<double>> decaying;
  std::vector<std::complex<double>> conserved;
  double zero_tolerance = 0.0;
  bool singular_jacobian = false;
};

RateSpectrum predict_linear_rates(const std::vector<MomentState>& states,
                                  const ModelSetup& setup);

// Largest real part among the decaying eigenvalues, negated: the binding
// exponential rate of the slowest non-conserved mode.
double slowest_decay_rate(const RateSpectrum& spec);

}  // namespace pbgk

#endif
