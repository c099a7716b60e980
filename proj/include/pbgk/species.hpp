#ifndef PBGK_SPECIES_HPP
#define PBGK_SPECIES_HPP

#include <string>
#include <vector>

namespace pbgk {

// Static description of one species. Temperatures are in energy units
// (Boltzmann constant absorbed), so thermal speeds are sqrt(T/m).
struct SpeciesSpec {
  double mass = 1.0;
  int internal_dof = 0;        // number of internal-energy axes l
  std::vector<int> slots;      // global internal-variable indices, size internal_dof
  double nu_self = 1.0;        // self collision-frequency scale
  double nu_cross = 0.0;       // cross collision-frequency scale
  double z = 1.0;              // temperature-relaxation ratio: 1/z = (1/Z_r)(d+l)/d

  void validate(int d) const;  // throws ConstraintViolated on nonsense
};

// Free parameters of the interspecies exchange coefficients.
struct MixtureParams {
  double delta = 1.0;        // velocity mixing weight
  double beta = 1.0;         // internal-mean mixing weight
  double alpha = 1.0;        // velocity-temperature mixing weight
  double gamma = 0.0;        // velocity-temperature drift-heating coefficient
  double gamma_tilde = 0.0;  // internal-temperature counterpart
};

// Frequency ratio epsilon = nu_12 / nu_21, derived on demand and never stored.
// Throws UndefinedEpsilon when nu_21 == 0.
double epsilon_ratio(double nu_12, double nu_21);

// Upper admissibility bounds for the drift-heating coefficients.
double gamma_upper_bound(const MixtureParams& p, double m1, double m2, double eps, int d);
double gamma_tilde_upper_bound(const MixtureParams& p, double m1, double m2, double eps, int l1);

struct ConstraintReport {
  std::vector<std::string> violated;
  bool ok() const { return violated.empty(); }
};

// Checks every admissibility constraint on the exchange parameters; the report
// lists the names of all violated constraints. validate_mixture_params throws
// ConstraintViolated with the same list.
ConstraintReport check_mixture_params(const MixtureParams& p, const SpeciesSpec& s1,
                                      const SpeciesSpec& s2, int d);
void validate_mixture_params(const MixtureParams& p, const SpeciesSpec& s1,
                             const SpeciesSpec& s2, int d);

}  // namespace pbgk

#endif
