#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sodeint/types.hpp"

namespace sodeint {

// Coefficient callbacks write into a caller-provided vector so the
// integration loop stays allocation-free.  They must be pure and safe to
// call concurrently.
using DriftFn = std::function<void(double t, const Vector& x, Vector& out)>;
using DiffusionFn = std::function<void(double t, const Vector& x, int r, Vector& out)>;
using DiffusionPairFn =
    std::function<void(double t, const Vector& x, int r1, int r2, Vector& out)>;
using JacobianFn = std::function<void(double t, const Vector& x, Matrix& out)>;

/// A d-dimensional Ito equation driven by m independent Wiener processes,
///   dX = f(t,X) dt + sum_r g^r(t,X) dW^r,   X(0) = X0,
/// together with the derivative products g^{r1,r2} = (dg^{r1}/dx) g^{r2}
/// consumed by Milstein-type schemes and the regularity constants used for
/// step-size bounds and condition checks.  Immutable after construction.
struct SodeProblem {
  int dim = 1;
  int num_drivers = 1;

  DriftFn drift;
  DiffusionFn diffusion;
  DiffusionPairFn diffusion_deriv_product;
  JacobianFn drift_jacobian;  // optional; central differences when absent

  NoiseStructure noise_structure = NoiseStructure::General;
  double growth_rate_q = 2.0;   // polynomial growth rate q >= 2
  double monotonicity_L = 1.0;  // one-sided constant L > 0
  double eta = 1.0;             // eta > 1/2 in the monotonicity condition
  std::optional<double> eta1;   // > 1, split-step Milstein condition
  std::optional<double> eta2;   // > 0, split-step Milstein condition
  std::optional<double> coercivity_C;  // defaults to L when unset

  double horizon_T = 1.0;
  Vector initial_value;
  // Random initial condition, keyed by (seed, sample_index); when set, the
  // Monte Carlo harness draws X0 per sample instead of using initial_value.
  std::function<Vector(std::uint64_t seed, std::uint64_t sample_index)> initial_sampler;

  double coercivity_constant() const { return coercivity_C.value_or(monotonicity_L); }

  // Allocating convenience evaluators (tests, verifiers).
  Vector drift_at(double t, const Vector& x) const;
  Vector diffusion_at(double t, const Vector& x, int r) const;
  Vector diffusion_pair_at(double t, const Vector& x, int r1, int r2) const;
  Matrix drift_jacobian_at(double t, const Vector& x) const;
};

enum class ConditionId {
  GlobalMonotonicity,
  SSBMMonotonicity,
  Coercivity,
  LocalLipschitzDriftJacobian,
  LocalLipschitzDiffusionJacobian,
};

std::string to_string(ConditionId id);

/// Result of a sampled inequality check.  The conditions are quantified over
/// all of R^d, so a numeric check can only falsify: a pass means "no
/// violation found" on the sampled points, never a proof.
struct ConditionReport {
  ConditionId condition_id;
  double worst_ratio = 0.0;  // max over samples of LHS / RHS
  long num_samples = 0;
  double sample_region_radius = 0.0;
  bool passed = false;

  std::string verdict() const {
    return passed ? "no violation found" : "violation found";
  }
};

/// Checks <f(t,x1)-f(t,x2), x1-x2> + eta sum_r |g^r(t,x1)-g^r(t,x2)|^2
/// against L |x1-x2|^2 on pseudo-random pairs drawn uniformly from the ball
/// of the given radius, with t uniform on [0, T].  Pairs closer than 1e-12
/// are skipped (the ratio degenerates to 0/0).  Sample i always comes from
/// substream i, so enlarging num_samples only extends the sample set and the
/// worst ratio is monotone in num_samples.
ConditionReport verify_monotonicity(const SodeProblem& problem, double eta,
                                    double region_radius, long num_samples,
                                    std::uint64_t seed, int workers = 1);

/// Same with the additional eta2 sum over |g^{r1,r2}(t,x1)-g^{r1,r2}(t,x2)|^2.
ConditionReport verify_ssbm_monotonicity(const SodeProblem& problem, double eta1,
                                         double eta2, double region_radius,
                                         long num_samples, std::uint64_t seed,
                                         int workers = 1);

/// Checks <f(t,x),x> + (p-1)/2 sum_r |g^r(t,x)|^2 <= C (1+|x|^2) on sampled
/// points, with C from the problem metadata (default L).
ConditionReport verify_coercivity(const SodeProblem& problem, double p,
                                  double region_radius, long num_samples,
                                  std::uint64_t seed, int workers = 1);

/// Sampled check of the local Lipschitz bounds on the drift or diffusion
/// Jacobians, with caller-supplied constants (the derived bounds may need an
/// enlarged L).  `which` selects LocalLipschitzDriftJacobian or
/// LocalLipschitzDiffusionJacobian.
ConditionReport verify_local_lipschitz(const SodeProblem& problem, ConditionId which,
                                       double L, double q, double region_radius,
                                       long num_samples, std::uint64_t seed);

/// Largest deviation |fd - g^{r1,r2}| / max(1, |g^{r1,r2}|) between the
/// supplied derivative products and a central finite difference of g^{r1}
/// along g^{r2} (step 1e-5), over sampled (t, x, r1, r2).
double max_derivative_product_deviation(const SodeProblem& problem, double region_radius,
                                        long num_samples, std::uint64_t seed);

/// Verifies the structural consequences of the declared noise structure on
/// sampled points: Additive implies g^{r1,r2} == 0, Commutative implies
/// g^{r1,r2} == g^{r2,r1} (both to 1e-12 relative).
bool check_noise_structure(const SodeProblem& problem, double region_radius,
                           long num_samples, std::uint64_t seed);

}  // namespace sodeint
