#include "pbgk/species.hpp"

#include <algorithm>
#include <cmath>

#include "pbgk/errors.hpp"

namespace pbgk {

void SpeciesSpec::validate(int d) const {
  std::vector<std::string> bad;
  if (!(mass > 0)) bad.push_back("mass_positive");
  if (d < 1) bad.push_back("velocity_dim_positive");
  if (internal_dof < 0) bad.push_back("internal_dof_nonnegative");
  if (static_cast<int>(slots.size()) != internal_dof) bad.push_back("slots_size");
  for (int s : slots)
    if (s < 0) bad.push_back("slot_index_nonnegative");
  std::vector<int> sorted = slots;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    bad.push_back("slots_distinct");
  if (!(nu_self >= 0)) bad.push_back("nu_self_nonnegative");
  if (!(nu_cross >= 0)) bad.push_back("nu_cross_nonnegative");
  if (!(z > 0)) bad.push_back("z_positive");
  if (!bad.empty()) throw ConstraintViolated(std::move(bad));
}

double epsilon_ratio(double nu_12, double nu_21) {
  if (nu_21 == 0.0) throw UndefinedEpsilon();
  return nu_12 / nu_21;
}

double gamma_upper_bound(const MixtureParams& p, double m1, double m2, double eps, int d) {
  const double r = m1 / m2 * eps;
  return m1 / d * (1.0 - p.delta) * ((1.0 + r) * p.delta + 1.0 - r);
}

double gamma_tilde_upper_bound(const MixtureParams& p, double m1, double m2, double eps, int l1) {
  const double r = m1 / m2 * eps;
  return m1 / l1 * (1.0 - p.beta) * ((1.0 + r) * p.beta + 1.0 - r);
}

ConstraintReport check_mixture_params(const MixtureParams& p, const SpeciesSpec& s1,
                                      const SpeciesSpec& s2, int d) {
  ConstraintReport rep;
  auto fail = [&rep](const std::string& name) { rep.violated.push_back(name); };

  const int l1 = s1.internal_dof;
  const int l2 = s2.internal_dof;
  if (l1 < 1 || l2 < 1) fail("internal_dof_at_least_one");

  double eps = 0.0;
  bool have_eps = true;
  try {
    eps = epsilon_ratio(s1.nu_cross, s2.nu_cross);
  } catch (const UndefinedEpsilon&) {
    have_eps = false;
    fail("epsilon_defined");
  }
  if (have_eps && !(eps > 0)) fail("epsilon_positive");
  if (!have_eps || !(eps > 0) || l1 < 1 || l2 < 1) return rep;

  const double r = s1.mass / s2.mass * eps;
  const double mix_lo = (r - 1.0) / (1.0 + r);

  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) fail("alpha_range");
  if (!(p.delta >= mix_lo && p.delta <= 1.0)) fail("delta_range");
  if (!(p.beta >= mix_lo && p.beta <= 1.0)) fail("beta_range");
  if (!(p.gamma >= 0.0)) fail("gamma_nonnegative");
  if (!(p.gamma_tilde >= 0.0)) fail("gamma_tilde_nonnegative");
  if (p.gamma >= 0.0 && !(p.gamma <= gamma_upper_bound(p, s1.mass, s2.mass, eps, d) + 1e-15))
    fail("gamma_upper");
  if (p.gamma_tilde >= 0.0 &&
      !(p.gamma_tilde <= gamma_tilde_upper_bound(p, s1.mass, s2.mass, eps, l1) + 1e-15))
    fail("gamma_tilde_upper");
  const double cl = eps * l1 / static_cast<double>(l1 + l2);
  if (!(cl > 0.0 && cl <= 1.0)) fail("epsilon_internal_share");
  // Needed so the velocity-temperature part of the reverse exchange coefficient
  // stays a convex combination; without it the coefficient can go negative.
  if (!(eps * (1.0 - p.alpha) <= 1.0)) fail("lambda21_convexity");
  return rep;
}

void validate_mixture_params(const MixtureParams& p, const SpeciesSpec& s1,
                             const SpeciesSpec& s2, int d) {
  ConstraintReport rep = check_mixture_params(p, s1, s2, d);
  if (!rep.ok()) throw ConstraintViolated(std::move(rep.violated));
}

}  // namespace pbgk
