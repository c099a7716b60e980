#ifndef PBGK_DIAGNOSTICS_HPP
#define PBGK_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "pbgk/field.hpp"
#include "pbgk/maxwellian.hpp"
#include "pbgk/model.hpp"

namespace pbgk {

// Positivity floor applied inside logarithms of quadrature entropies. Cells at
// or below the floor contribute with ln(floor); clamp_bound reports the total
// absolute weight of such contributions so callers can see how much of the
// value rests on clamped cells.
inline constexpr double entropy_floor = 1e-300;

struct EntropyValue {
  double value = 0.0;
  double clamp_bound = 0.0;
};

// Quadrature entropy int f ln f and relative entropy int f ln(f/g) >= 0.
// relative_entropy throws UnboundedRelativeEntropy when f carries more than
// roundoff mass on cells where g is at the floor but f is not.
EntropyValue entropy(const DistributionField& f);
EntropyValue relative_entropy(const DistributionField& f, const DistributionField& g);

// Closed-form relative entropy between two product Gaussians of one species.
double gaussian_relative_entropy(const GaussianShape& g, const GaussianShape& m, double mass,
                                 int d, int l);

double l1_distance(const DistributionField& f, const DistributionField& g);

// Entropy production D_k >= 0 of species k: minus the k-th contribution to the
// time derivative of the composite Lyapunov functional. The distribution terms
// int (target - f) ln f are quadratures; every int (X - Y) ln M term is exact
// because ln of a Gaussian is a quadratic polynomial.
std::vector<double> entropy_production(const SystemState& s, const ModelSetup& setup,
                                       const RhsEval& rhs);

// Weight of int M_k ln M_k in the composite Lyapunov functional (0 for alpp).
double lyapunov_weight(const ModelSetup& setup, int k);

// Composite Lyapunov functional: sum_k [ int f_k ln f_k + w_k int M_k ln M_k ].
// Its time derivative along the flow equals -sum_k D_k.
double composite_lyapunov(const SystemState& s, const ModelSetup& setup, const RhsEval& rhs);

// ---------------------------------------------------------------------------
// Decay-theorem constants.

// Branches of the certified decay rate, the attained minimum, hypothesis
// bookkeeping, and envelope shapes. The relative-entropy envelope decays like
// exp(-h_decay_scale t); the L1 envelope like l1_prefactor * sqrt(B0) *
// exp(-l1_decay_scale t) with B0 the initial composite relative entropy.
struct TheoremConstants {
  std::vector<std::string> branch_names;
  std::vector<double> branch_values;
  int attained = -1;
  double rate = 0.0;
  double h_decay_scale = 0.0;
  double l1_decay_scale = 0.0;
  double l1_prefactor = 4.0;

  // Alternate constant for the two-temperature mixture model (tighter branch
  // set, envelope scales carrying the frequency-dominance margin).
  bool has_alt = false;
  std::vector<std::string> alt_branch_names;
  std::vector<double> alt_branch_values;
  int alt_attained = -1;
  double alt_rate = 0.0;
  double alt_h_decay_scale = 0.0;
  double alt_l1_decay_scale = 0.0;

  double c_freq = 0.0;        // frequency-dominance margin min_k (1 - a_kj/a_kk)
  std::vector<double> c_k;    // temperature-condition constants per species
  std::vector<std::string> unmet;  // names of hypotheses failing at this state
  bool certified() const { return unmet.empty(); }
};

// Evaluates the decay constants of the active model at the given state.
// A_bound / B_bound are the configured scalar bounds A(t) <= A_bound,
// B(t) >= B_bound on the time-dependent frequency envelopes (A_bound >=
// B_bound > 0); they enter the temperature-condition constants c_k and the
// frequency-side hypotheses.
TheoremConstants theorem_constants(const std::vector<SpeciesEval>& eval,
                                   const ModelSetup& setup, double A_bound, double B_bound);

// Throws HypothesisUnmet when tc carries unmet hypotheses.
void require_certified(const TheoremConstants& tc);

// ---------------------------------------------------------------------------
// Inequality checks behind the decay estimates.

// One checked inequality: slack >= 0 means it holds. hypothesis_met marks
// whether the state satisfies the assumptions under which the inequality is
// guaranteed; violations with hypothesis_met == false are reportable but not
// certifiable failures.
struct LemmaCheck {
  std::string name;
  double slack = 0.0;
  bool hypothesis_met = false;
  std::string note;
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;
  // Worst slack among checks with hypothesis_met; +inf when none apply.
  double worst_certified_slack() const;
};

// Evaluates the inequality suite at a macroscopic state:
//   entropy_order[k]       int M~_k ln M~_k <= int M_k ln M_k
//   ratio_lower[k]         (d/2)(T/Lambda) + (l/2)(T/Theta) >= (d+l)/2
//   weighted_ratio[k]      the cross-weighted variant with M_kj temperatures
//   stage_combination[k]   a_kk I(M~_k) + z_k a_kk I(M_k) + z_k a_kj I(M_kj) <= 0,
//                          I(X) = int ln M_k (X - f_k) in closed form
//   cross_entropy_order    a_12 H(M_12) + a_21 H(M_21) <= a_12 H(M_1) + a_21 H(M_2)
//   cross_entropy_order_eq same with the single-temperature shapes
// For one-species models only the per-species checks appear and a_kj = 0.
LemmaReport check_lemma_inequalities(const std::vector<SpeciesEval>& eval,
                                     const ModelSetup& setup, double A_bound, double B_bound);

// Largest z_k for which the stage-combination inequality is guaranteed at this
// state (+inf when the denominator is nonpositive, so every z works). cross is
// ignored when ev.a_cross == 0.
double stage_combination_z_bound(const SpeciesEval& ev, const GaussianShape& cross,
                                 double mass, int d, int l);

// Rebuilds per-species evaluations from macroscopic data alone (no kinetic
// fields), for inequality sweeps over sampled states.
std::vector<SpeciesEval> evaluate_macro_states(const std::vector<MacroState>& macros,
                                               const std::vector<double>& thetas,
                                               const ModelSetup& setup);

// ---------------------------------------------------------------------------
// Rate fitting and the L1 / relative-entropy bound.

struct DecayFit {
  double rate = 0.0;       // positive for a decaying series
  double intercept = 0.0;  // fitted ln value at t = 0
  double r2 = 0.0;
  int samples = 0;         // points actually used
};

// Least-squares fit of ln(values) against time. Skips the first tenth of the
// time window, stops at the first sample below 1e3 * noise_floor (when
// noise_floor > 0), and requires at least min_samples positive samples.
// Throws DegenerateSeries otherwise.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                        double noise_floor = 0.0, int min_samples = 10);

// L1 distance against the square-root relative-entropy bounds: holds requires
// l1 <= bound (the distance-squared estimate with constant 4); classical is
// the sharper two-mass form sqrt(2 mass H), valid for unit total mass.
struct DistanceBound {
  double l1 = 0.0;
  double h = 0.0;
  double bound = 0.0;      // 4 sqrt(H)
  double classical = 0.0;  // sqrt(2 mass(f) H)
  bool holds = false;
};

DistanceBound l1_entropy_bound(const DistributionField& f, const DistributionField& g);

// ---------------------------------------------------------------------------
// Per-record diagnostics.

struct SpeciesRecord {
  double n = 0.0;
  std::vector<double> u;
  std::vector<double> eta_bar;
  double T_t = 0.0;
  double T_r = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
  double T = 0.0;
  double entropy_f = 0.0;
  double entropy_M = 0.0;
  double entropy_Meq = 0.0;
  double h_f_Meq = 0.0;   // relative entropy of f against the equilibrium shape
  double h_M_Meq = 0.0;   // closed-form relative entropy of M_k against it
  double production = 0.0;
  double l1_f_M = 0.0;
  double l1_f_Meq = 0.0;
  double clamp_bound = 0.0;  // worst floored-cell weight among the quadratures
};

struct DiagnosticRecord {
  double time = 0.0;
  std::vector<SpeciesRecord> sp;
  std::vector<double> total_momentum;  // sum_k m_k int v f_k
  double total_energy = 0.0;           // velocity plus internal energy
  double total_mass = 0.0;             // sum_k m_k n_k
  double lyapunov = 0.0;
};

// Evaluates the full record at a state. work is reused across calls.
DiagnosticRecord diagnose(const SystemState& s, const ModelSetup& setup, RhsEval& work);

}  // namespace pbgk

#endif
