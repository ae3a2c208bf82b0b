#include "sodeint/problems.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace sodeint {

using nlohmann::json;

std::string to_string(ProblemFamily family) {
  switch (family) {
    case ProblemFamily::DoubleWell: return "double_well";
    case ProblemFamily::StochasticOscillator: return "oscillator";
    case ProblemFamily::GeometricBrownian: return "gbm";
    case ProblemFamily::AdditiveLinear: return "additive_linear";
  }
  return "?";
}

bool ParametricProblem::has_exact_solution() const {
  return family == ProblemFamily::StochasticOscillator ||
         family == ProblemFamily::GeometricBrownian;
}

Vector ParametricProblem::exact_endpoint(const BrownianPath& path, double t) const {
  if (family == ProblemFamily::StochasticOscillator) {
    return exact_oscillator(path, t, path.fine_dt, oscillator);
  }
  if (family == ProblemFamily::GeometricBrownian) {
    Vector out(1);
    out[0] = exact_gbm(path, t, params.at("mu").get<double>(),
                       params.at("sigma").get<double>(), sode.initial_value[0]);
    return out;
  }
  throw std::invalid_argument("exact_endpoint: family " + to_string(family) +
                              " has no closed-form solution");
}

ParametricProblem make_double_well(double sigma, double x0, double T) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("make_double_well: sigma must be nonnegative");
  }
  ParametricProblem p;
  p.family = ProblemFamily::DoubleWell;
  p.params = json{{"family", "double_well"}, {"sigma", sigma}, {"x0", x0}, {"T", T}};
  SodeProblem& s = p.sode;
  s.dim = 1;
  s.num_drivers = 1;
  s.noise_structure = NoiseStructure::Scalar;
  s.drift = [](double, const Vector& x, Vector& out) {
    out[0] = x[0] * (1.0 - x[0] * x[0]);
  };
  s.diffusion = [sigma](double, const Vector& x, int, Vector& out) {
    out[0] = sigma * (1.0 - x[0] * x[0]);
  };
  s.diffusion_deriv_product = [sigma](double, const Vector& x, int, int, Vector& out) {
    out[0] = -2.0 * sigma * sigma * x[0] * (1.0 - x[0] * x[0]);
  };
  s.drift_jacobian = [](double, const Vector& x, Matrix& out) {
    out(0, 0) = 1.0 - 3.0 * x[0] * x[0];
  };
  s.growth_rate_q = 3.0;
  s.monotonicity_L = 1.0;
  // Any eta with 2 eta sigma^2 <= 1 and eta > 1/2 works; such an eta exists
  // exactly when sigma^2 < 1.
  s.eta = sigma > 0.0 ? std::max(0.5 / (sigma * sigma), 0.5 + 1e-9) : 1.0;
  s.horizon_T = T;
  s.initial_value = Vector::Constant(1, x0);
  return p;
}

ParametricProblem make_oscillator(const OscillatorParams& op, double T) {
  ParametricProblem p;
  p.family = ProblemFamily::StochasticOscillator;
  p.oscillator = op;
  p.params = json{{"family", "oscillator"}, {"mu", op.mu},     {"theta", op.theta},
                  {"sigma1", op.sigma1},    {"sigma2", op.sigma2},
                  {"r0", op.r0},            {"phi0", op.phi0}, {"T", T}};
  SodeProblem& s = p.sode;
  s.dim = 2;
  s.num_drivers = 2;
  s.noise_structure = NoiseStructure::Commutative;
  const double mu = op.mu, theta = op.theta, s1 = op.sigma1, s2 = op.sigma2;
  s.drift = [mu, theta, s2](double, const Vector& x, Vector& out) {
    const double rr = x[0] * x[0] + x[1] * x[1];
    const double radial = mu - rr - 0.5 * s2 * s2;
    out[0] = radial * x[0] - theta * x[1];
    out[1] = radial * x[1] + theta * x[0];
  };
  s.diffusion = [s1, s2](double, const Vector& x, int r, Vector& out) {
    if (r == 0) {
      out[0] = s1 * x[0];
      out[1] = s1 * x[1];
    } else {
      out[0] = -s2 * x[1];
      out[1] = s2 * x[0];
    }
  };
  s.diffusion_deriv_product = [s1, s2](double, const Vector& x, int r1, int r2,
                                       Vector& out) {
    if (r1 == 0 && r2 == 0) {
      out[0] = s1 * s1 * x[0];
      out[1] = s1 * s1 * x[1];
    } else if (r1 == 1 && r2 == 1) {
      out[0] = -s2 * s2 * x[0];
      out[1] = -s2 * s2 * x[1];
    } else {
      // g^{1,2} == g^{2,1}: the noise is commutative.
      out[0] = -s1 * s2 * x[1];
      out[1] = s1 * s2 * x[0];
    }
  };
  s.drift_jacobian = [mu, theta, s2](double, const Vector& x, Matrix& out) {
    const double c = mu - 0.5 * s2 * s2;
    out(0, 0) = c - 3.0 * x[0] * x[0] - x[1] * x[1];
    out(0, 1) = -2.0 * x[0] * x[1] - theta;
    out(1, 0) = -2.0 * x[0] * x[1] + theta;
    out(1, 1) = c - x[0] * x[0] - 3.0 * x[1] * x[1];
  };
  s.growth_rate_q = 3.0;
  s.eta = 1.0;
  const double drift_onesided = mu - 0.5 * s2 * s2;  // cubic part is monotone
  const double noise_sq = s1 * s1 + s2 * s2;
  s.monotonicity_L = std::max(1.0, drift_onesided + noise_sq);
  // The derivative products are linear, so the split-step Milstein condition
  // is satisfiable whenever there is slack left after the eta1 term.
  const double eta1 = 1.05;
  if (noise_sq > 0.0) {
    const double slack = s.monotonicity_L - drift_onesided - eta1 * noise_sq;
    if (slack > 0.0) {
      s.eta1 = eta1;
      s.eta2 = 0.95 * slack / (noise_sq * noise_sq);
    }
  }
  // Coercivity constant sized for moments up to p = 14.
  s.coercivity_C =
      std::max(s.monotonicity_L, std::max(0.0, drift_onesided) + 6.5 * noise_sq);
  s.horizon_T = T;
  s.initial_value = Vector(2);
  s.initial_value << op.r0 * std::cos(op.phi0), op.r0 * std::sin(op.phi0);
  return p;
}

ParametricProblem make_gbm(double mu, double sigma, double x0, double T) {
  ParametricProblem p;
  p.family = ProblemFamily::GeometricBrownian;
  p.params = json{{"family", "gbm"}, {"mu", mu}, {"sigma", sigma}, {"x0", x0}, {"T", T}};
  SodeProblem& s = p.sode;
  s.dim = 1;
  s.num_drivers = 1;
  s.noise_structure = NoiseStructure::Scalar;
  s.drift = [mu](double, const Vector& x, Vector& out) { out[0] = mu * x[0]; };
  s.diffusion = [sigma](double, const Vector& x, int, Vector& out) {
    out[0] = sigma * x[0];
  };
  s.diffusion_deriv_product = [sigma](double, const Vector& x, int, int, Vector& out) {
    out[0] = sigma * sigma * x[0];
  };
  s.drift_jacobian = [mu](double, const Vector&, Matrix& out) { out(0, 0) = mu; };
  s.growth_rate_q = 2.0;  // coefficients are globally Lipschitz
  s.eta = 1.0;
  s.eta1 = 2.0;
  s.eta2 = 1.0;
  const double s2 = sigma * sigma;
  s.monotonicity_L = std::max(1.0, mu + 2.0 * s2 + s2 * s2);
  s.coercivity_C = std::max(s.monotonicity_L, mu + 6.5 * s2);
  s.horizon_T = T;
  s.initial_value = Vector::Constant(1, x0);
  return p;
}

ParametricProblem make_additive_linear(double lambda, double sigma, double x0, double T) {
  ParametricProblem p;
  p.family = ProblemFamily::AdditiveLinear;
  p.params = json{{"family", "additive_linear"},
                  {"lambda", lambda},
                  {"sigma", sigma},
                  {"x0", x0},
                  {"T", T}};
  SodeProblem& s = p.sode;
  s.dim = 1;
  s.num_drivers = 1;
  s.noise_structure = NoiseStructure::Additive;
  s.drift = [lambda](double, const Vector& x, Vector& out) { out[0] = -lambda * x[0]; };
  s.diffusion = [sigma](double, const Vector&, int, Vector& out) { out[0] = sigma; };
  s.diffusion_deriv_product = [](double, const Vector&, int, int, Vector& out) {
    out[0] = 0.0;
  };
  s.drift_jacobian = [lambda](double, const Vector&, Matrix& out) { out(0, 0) = -lambda; };
  s.growth_rate_q = 2.0;
  s.eta = 1.0;
  s.eta1 = 2.0;
  s.eta2 = 1.0;
  s.monotonicity_L = 1.0;
  s.coercivity_C = std::max(1.0, 6.5 * sigma * sigma);
  s.horizon_T = T;
  s.initial_value = Vector::Constant(1, x0);
  return p;
}

namespace {

double number_field(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw std::invalid_argument("problem." + key + " must be a number");
  }
  return j.at(key).get<double>();
}

}  // namespace

ParametricProblem problem_from_json(const json& descriptor) {
  if (!descriptor.is_object()) {
    throw std::invalid_argument("problem descriptor must be a JSON object");
  }
  if (!descriptor.contains("family") || !descriptor.at("family").is_string()) {
    throw std::invalid_argument("problem.family is required and must be a string");
  }
  const std::string family = descriptor.at("family").get<std::string>();
  const double T = number_field(descriptor, "T", 1.0);
  if (!(T > 0.0)) throw std::invalid_argument("problem.T must be positive");
  if (family == "double_well") {
    return make_double_well(number_field(descriptor, "sigma", 0.3),
                            number_field(descriptor, "x0", 2.0), T);
  }
  if (family == "oscillator") {
    OscillatorParams op;
    op.mu = number_field(descriptor, "mu", op.mu);
    op.theta = number_field(descriptor, "theta", op.theta);
    op.sigma1 = number_field(descriptor, "sigma1", op.sigma1);
    op.sigma2 = number_field(descriptor, "sigma2", op.sigma2);
    op.r0 = number_field(descriptor, "r0", op.r0);
    op.phi0 = number_field(descriptor, "phi0", op.phi0);
    return make_oscillator(op, T);
  }
  if (family == "gbm") {
    return make_gbm(number_field(descriptor, "mu", 1.0),
                    number_field(descriptor, "sigma", 0.8),
                    number_field(descriptor, "x0", 1.0), T);
  }
  if (family == "additive_linear") {
    return make_additive_linear(number_field(descriptor, "lambda", 1.0),
                                number_field(descriptor, "sigma", 0.5),
                                number_field(descriptor, "x0", 1.0), T);
  }
  throw std::invalid_argument("problem.family: unknown family '" + family + "'");
}

Vector exact_oscillator(const BrownianPath& path, double t, double riemann_dt,
                        const OscillatorParams& op) {
  if (path.num_drivers < 2) {
    throw std::invalid_argument("exact_oscillator: path needs two drivers");
  }
  const auto stride = static_cast<std::int64_t>(std::llround(riemann_dt / path.fine_dt));
  if (stride < 1 ||
      std::abs(static_cast<double>(stride) * path.fine_dt - riemann_dt) > 1e-12) {
    throw std::invalid_argument(
        "exact_oscillator: riemann_dt must be a multiple of the path resolution");
  }
  const auto steps = static_cast<std::int64_t>(std::llround(t / path.fine_dt));
  if (steps < 0 || steps > path.num_fine_steps ||
      std::abs(static_cast<double>(steps) * path.fine_dt - t) > 1e-12 * std::max(1.0, t)) {
    throw std::invalid_argument("exact_oscillator: t does not lie on the fine grid");
  }
  if (steps % stride != 0) {
    throw std::invalid_argument("exact_oscillator: t does not lie on the Riemann grid");
  }
  const double mu = op.mu, s1 = op.sigma1, s2 = op.sigma2;
  double w1 = 0.0, w2 = 0.0, integral = 0.0;
  for (std::int64_t i = 0; i < steps; ++i) {
    if (i % stride == 0) {
      const double s = static_cast<double>(i) * path.fine_dt;
      integral += std::exp((2.0 * mu - s1 * s1) * s + 2.0 * s1 * w1) * riemann_dt;
    }
    w1 += path.increments(i, 0);
    w2 += path.increments(i, 1);
  }
  const double r = op.r0 * std::exp((mu - 0.5 * s1 * s1) * t + s1 * w1) /
                   std::sqrt(1.0 + 2.0 * op.r0 * op.r0 * integral);
  const double phi = op.phi0 + op.theta * t + s2 * w2;
  Vector out(2);
  out << r * std::cos(phi), r * std::sin(phi);
  return out;
}

double exact_gbm(const BrownianPath& path, double t, double mu, double sigma, double x0) {
  const auto steps = static_cast<std::int64_t>(std::llround(t / path.fine_dt));
  if (steps < 0 || steps > path.num_fine_steps ||
      std::abs(static_cast<double>(steps) * path.fine_dt - t) > 1e-12 * std::max(1.0, t)) {
    throw std::invalid_argument("exact_gbm: t does not lie on the fine grid");
  }
  double w = 0.0;
  for (std::int64_t i = 0; i < steps; ++i) w += path.increments(i, 0);
  return x0 * std::exp((mu - 0.5 * sigma * sigma) * t + sigma * w);
}

}  // namespace sodeint
