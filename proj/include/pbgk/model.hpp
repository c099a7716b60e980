#ifndef PBGK_MODEL_HPP
#define PBGK_MODEL_HPP

#include <string>
#include <vector>

#include "pbgk/field.hpp"
#include "pbgk/macro.hpp"
#include "pbgk/maxwellian.hpp"
#include "pbgk/species.hpp"

namespace pbgk {

// The five space-homogeneous relaxation models.
//   alpp     one species, velocity + scalar internal energy, single target
//   kpp_one  one species, two relaxation stages, Theta pulled toward T_r
//   bip_one  one species, two relaxation stages, algebraic Theta equation only
//   kpp_mix  two species, per-stage temperature exchange (two-temperature form)
//   new_mix  two species, cross relaxation toward a single mixed temperature
enum class ModelKind { alpp, kpp_one, bip_one, kpp_mix, new_mix };

const char* model_name(ModelKind k);
ModelKind model_from_name(const std::string& name);
bool is_mixture(ModelKind k);
int species_count(ModelKind k);

// How collision frequencies scale with density. density_weighted divides the
// configured rates by the total density, so nu_kj * n_j = nu~_kj n_j / (n1+n2).
enum class FrequencyLaw { constant_rate, density_weighted };

// Parameters of the alpp model (one species, mass 1, d = 3, scalar energy I
// with internal energy eps(I) = I^(2/delta_dof)).
struct AlppParams {
  double delta_dof = 2.0;  // internal degrees of freedom
  double a_nu = 1.0;       // collision frequency
  double theta = 1.0;      // coupling weight in [0, 1]
};

struct ModelSetup {
  ModelKind kind = ModelKind::new_mix;
  int d = 3;
  FrequencyLaw law = FrequencyLaw::density_weighted;
  std::vector<SpeciesSpec> species;
  MixtureParams mix;   // mixtures only
  AlppParams alpp;     // alpp only

  void validate() const;  // throws ConstraintViolated
};

// Dynamic state: one distribution per species plus its relaxation temperature
// Theta (unused by the alpp model and by monoatomic species).
struct SpeciesState {
  DistributionField f;
  double theta = 0.0;
};

struct SystemState {
  std::vector<SpeciesState> sp;
  double time = 0.0;
};

// Per-species quantities derived during one right-hand-side evaluation.
struct SpeciesEval {
  MacroState macro;
  double lambda = 0.0;  // velocity temperature from the constraint
  double theta = 0.0;   // relaxation temperature (state copy)
  double T = 0.0;       // single equilibrium temperature
  double a_self = 0.0;  // nu_kk n_k under the active frequency law
  double a_cross = 0.0; // nu_kj n_j
  GaussianShape max_shape;  // species Maxwellian M_k
};

// Moments used by the alpp model. T_int is defined through the mean internal
// energy: e_int = (delta_dof / 2) T_int.
struct AlppMoments {
  double rho = 0.0;
  std::vector<double> u;
  double T_tr = 0.0;
  double T_int = 0.0;
  double T_equ = 0.0;
};

struct RhsEval {
  std::vector<std::vector<double>> df;  // one cell array per species
  std::vector<double> dtheta;           // dTheta_k/dt per species
  std::vector<SpeciesEval> eval;        // models with Gaussian targets
  ExchangePair exch;                    // mixtures only
  bool has_exchange = false;
  AlppMoments alpp;                     // alpp only
};

// Evaluates the model right-hand side at the given state. Buffers inside out
// are reused across calls. Throws VacuumState / NonpositiveLambda /
// NonpositiveExchangeTemperature when the state leaves the admissible set.
void assemble_rhs(const SystemState& s, const ModelSetup& setup, RhsEval& out);

// Collision-rate products (nu_kk n_k, nu_kj n_j) under the active law.
void collision_rates(const ModelSetup& setup, const std::vector<double>& densities,
                     std::vector<double>& a_self, std::vector<double>& a_cross);

// alpp model helpers. The relaxation target and the equilibrium are normalized
// discretely (scaled so their grid quadrature mass matches rho exactly), which
// realizes "mass of the target equals the state's mass" on the truncated grid.
AlppMoments alpp_moments(const DistributionField& f, double delta_dof);
DistributionField alpp_target(const AlppMoments& m, const AlppParams& p, GridPtr grid);
DistributionField alpp_equilibrium(const AlppMoments& m, const AlppParams& p, GridPtr grid);

// Continuum normalization constant 1 / Gamma(delta_dof/2 + 1) of the energy
// factor exp(-I^(2/delta)/T) (the T^{delta/2} part is carried separately).
double alpp_lambda_delta(double delta_dof);

// Interpolated temperatures of the alpp target.
double alpp_mix_temperature(const AlppMoments& m, const AlppParams& p);    // (1-θ)T_tr + θT_equ
double alpp_relax_temperature(const AlppMoments& m, const AlppParams& p);  // θT_equ + (1-θ)T_int

}  // namespace pbgk

#endif
