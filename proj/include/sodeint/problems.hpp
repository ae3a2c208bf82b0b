#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "sodeint/noise.hpp"
#include "sodeint/sde_model.hpp"

namespace sodeint {

enum class ProblemFamily { DoubleWell, StochasticOscillator, GeometricBrownian, AdditiveLinear };

std::string to_string(ProblemFamily family);

struct OscillatorParams {
  double mu = 0.4;
  double theta = 1.0;
  double sigma1 = 0.5;
  double sigma2 = 0.6;
  double r0 = 1.97;
  double phi0 = 0.7853981633974483;  // pi/4
};

/// A shipped problem family instantiated with concrete parameters: the
/// family tag, a canonical JSON echo of the parameters, and the assembled
/// SodeProblem with its regularity metadata filled in.
struct ParametricProblem {
  ProblemFamily family;
  nlohmann::json params;
  SodeProblem sode;
  OscillatorParams oscillator;  // valid when family == StochasticOscillator

  bool has_exact_solution() const;
  /// Closed-form endpoint evaluated on the given path (oscillator, GBM).
  Vector exact_endpoint(const BrownianPath& path, double t) const;
};

/// dX = X(1-X^2) dt + sigma (1-X^2) dW.  Scalar noise, q = 3, L = 1;
/// eta is set to max(1/(2 sigma^2), 1/2+), which satisfies the monotonicity
/// condition whenever sigma^2 < 1.
ParametricProblem make_double_well(double sigma, double x0 = 2.0, double T = 1.0);

/// Planar oscillator with commutative noise, obtained from the polar system
/// r' = r(mu - r^2), phi' = theta with noise sigma1 r dW^1, sigma2 dW^2 by
/// transforming to Euclidean coordinates (the drift carries the Ito
/// correction -sigma2^2 x / 2).  q = 3; admits a closed-form solution.
ParametricProblem make_oscillator(const OscillatorParams& params = {}, double T = 1.0);

/// dX = mu X dt + sigma X dW; classic closed-form oracle, q = 2.
ParametricProblem make_gbm(double mu, double sigma, double x0 = 1.0, double T = 1.0);

/// dX = -lambda X dt + sigma dW; additive noise, so Milstein-type schemes
/// degenerate to their Euler-type counterparts.
ParametricProblem make_additive_linear(double lambda, double sigma, double x0 = 1.0,
                                       double T = 1.0);

/// Builds a problem from a JSON descriptor such as
///   {"family": "double_well", "sigma": 0.3, "x0": 2.0, "T": 1.0}
/// Families: double_well, oscillator, gbm, additive_linear.  Missing fields
/// fall back to the family defaults; malformed fields raise errors naming
/// the offending field.
ParametricProblem problem_from_json(const nlohmann::json& descriptor);

/// Exact oscillator state at time t.  The time integral in the radial part
/// is approximated by a left-endpoint Riemann sum with step riemann_dt,
/// which must be a multiple of the path resolution; t must lie on the
/// Riemann grid.  The angle arg(x1 + i x2) convention is (-pi, pi].
Vector exact_oscillator(const BrownianPath& path, double t, double riemann_dt,
                        const OscillatorParams& params);

/// Exact geometric Brownian motion at time t on the given path.
double exact_gbm(const BrownianPath& path, double t, double mu, double sigma, double x0);

}  // namespace sodeint
