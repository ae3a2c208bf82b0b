#include "sodeint/sde_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sodeint/parallel.hpp"
#include "sodeint/rng.hpp"

namespace sodeint {

Vector SodeProblem::drift_at(double t, const Vector& x) const {
  Vector out(dim);
  drift(t, x, out);
  return out;
}

Vector SodeProblem::diffusion_at(double t, const Vector& x, int r) const {
  Vector out(dim);
  diffusion(t, x, r, out);
  return out;
}

Vector SodeProblem::diffusion_pair_at(double t, const Vector& x, int r1, int r2) const {
  Vector out(dim);
  diffusion_deriv_product(t, x, r1, r2, out);
  return out;
}

Matrix SodeProblem::drift_jacobian_at(double t, const Vector& x) const {
  Matrix out(dim, dim);
  if (drift_jacobian) {
    drift_jacobian(t, x, out);
    return out;
  }
  // Central differences, column by column.
  const double h = 1e-7 * (1.0 + x.norm());
  Vector xp = x, xm = x, fp(dim), fm(dim);
  for (int j = 0; j < dim; ++j) {
    xp[j] += h;
    xm[j] -= h;
    drift(t, xp, fp);
    drift(t, xm, fm);
    out.col(j) = (fp - fm) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return out;
}

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::GlobalMonotonicity: return "global_monotonicity";
    case ConditionId::SSBMMonotonicity: return "ssbm_monotonicity";
    case ConditionId::Coercivity: return "coercivity";
    case ConditionId::LocalLipschitzDriftJacobian: return "local_lipschitz_drift_jacobian";
    case ConditionId::LocalLipschitzDiffusionJacobian:
      return "local_lipschitz_diffusion_jacobian";
  }
  return "?";
}

namespace {

// Uniform draw from the ball of radius R: normal direction, radius ~ R U^{1/d}.
Vector ball_point(RandomStream& stream, int dim, double radius) {
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x[i] = stream.normal();
  const double n = x.norm();
  if (n == 0.0) return Vector::Zero(dim);
  const double r = radius * std::pow(stream.uniform(), 1.0 / dim);
  return (r / n) * x;
}

ConditionReport run_pair_check(
    const SodeProblem& problem, ConditionId id, double region_radius, long num_samples,
    std::uint64_t seed, int workers,
    const std::function<double(double t, const Vector& x1, const Vector& x2)>& ratio_fn) {
  if (!(region_radius > 0.0)) {
    throw std::invalid_argument("condition check: region_radius must be positive");
  }
  if (num_samples < 1) {
    throw std::invalid_argument("condition check: num_samples must be >= 1");
  }
  std::vector<double> ratios(num_samples, -std::numeric_limits<double>::infinity());
  parallel_samples(num_samples, workers, [&](std::int64_t j, int) {
    RandomStream stream(seed, static_cast<std::uint64_t>(j), 0,
                        StreamPurpose::ConditionSampling);
    const double t = problem.horizon_T * stream.uniform();
    const Vector x1 = ball_point(stream, problem.dim, region_radius);
    const Vector x2 = ball_point(stream, problem.dim, region_radius);
    if ((x1 - x2).norm() < 1e-12) return;  // ratio degenerates
    ratios[j] = ratio_fn(t, x1, x2);
  });
  double worst = -std::numeric_limits<double>::infinity();
  for (double r : ratios) worst = std::max(worst, r);
  if (!std::isfinite(worst)) worst = 0.0;  // every pair skipped
  ConditionReport report;
  report.condition_id = id;
  report.worst_ratio = worst;
  report.num_samples = num_samples;
  report.sample_region_radius = region_radius;
  report.passed = worst <= 1.0 + 1e-9;
  return report;
}

}  // namespace

ConditionReport verify_monotonicity(const SodeProblem& problem, double eta,
                                    double region_radius, long num_samples,
                                    std::uint64_t seed, int workers) {
  if (!(eta > 0.5)) {
    throw std::invalid_argument("verify_monotonicity: eta must exceed 1/2");
  }
  const double L = problem.monotonicity_L;
  return run_pair_check(
      problem, ConditionId::GlobalMonotonicity, region_radius, num_samples, seed, workers,
      [&](double t, const Vector& x1, const Vector& x2) {
        const Vector dx = x1 - x2;
        double lhs = (problem.drift_at(t, x1) - problem.drift_at(t, x2)).dot(dx);
        for (int r = 0; r < problem.num_drivers; ++r) {
          lhs += eta * (problem.diffusion_at(t, x1, r) - problem.diffusion_at(t, x2, r))
                           .squaredNorm();
        }
        return lhs / (L * dx.squaredNorm());
      });
}

ConditionReport verify_ssbm_monotonicity(const SodeProblem& problem, double eta1,
                                         double eta2, double region_radius,
                                         long num_samples, std::uint64_t seed,
                                         int workers) {
  if (!(eta1 > 1.0)) {
    throw std::invalid_argument("verify_ssbm_monotonicity: eta1 must exceed 1");
  }
  if (!(eta2 > 0.0)) {
    throw std::invalid_argument("verify_ssbm_monotonicity: eta2 must be positive");
  }
  const double L = problem.monotonicity_L;
  const int m = problem.num_drivers;
  return run_pair_check(
      problem, ConditionId::SSBMMonotonicity, region_radius, num_samples, seed, workers,
      [&](double t, const Vector& x1, const Vector& x2) {
        const Vector dx = x1 - x2;
        double lhs = (problem.drift_at(t, x1) - problem.drift_at(t, x2)).dot(dx);
        for (int r = 0; r < m; ++r) {
          lhs += eta1 * (problem.diffusion_at(t, x1, r) - problem.diffusion_at(t, x2, r))
                            .squaredNorm();
        }
        for (int r1 = 0; r1 < m; ++r1) {
          for (int r2 = 0; r2 < m; ++r2) {
            lhs += eta2 * (problem.diffusion_pair_at(t, x1, r1, r2) -
                           problem.diffusion_pair_at(t, x2, r1, r2))
                              .squaredNorm();
          }
        }
        return lhs / (L * dx.squaredNorm());
      });
}

ConditionReport verify_coercivity(const SodeProblem& problem, double p,
                                  double region_radius, long num_samples,
                                  std::uint64_t seed, int workers) {
  if (!(p >= 2.0)) {
    throw std::invalid_argument("verify_coercivity: p must be >= 2");
  }
  if (!(region_radius > 0.0)) {
    throw std::invalid_argument("verify_coercivity: region_radius must be positive");
  }
  if (num_samples < 1) {
    throw std::invalid_argument("verify_coercivity: num_samples must be >= 1");
  }
  const double C = problem.coercivity_constant();
  std::vector<double> ratios(num_samples, -std::numeric_limits<double>::infinity());
  parallel_samples(num_samples, workers, [&](std::int64_t j, int) {
    RandomStream stream(seed, static_cast<std::uint64_t>(j), 0,
                        StreamPurpose::ConditionSampling);
    const double t = problem.horizon_T * stream.uniform();
    const Vector x = ball_point(stream, problem.dim, region_radius);
    double lhs = problem.drift_at(t, x).dot(x);
    for (int r = 0; r < problem.num_drivers; ++r) {
      lhs += 0.5 * (p - 1.0) * problem.diffusion_at(t, x, r).squaredNorm();
    }
    ratios[j] = lhs / (C * (1.0 + x.squaredNorm()));
  });
  double worst = -std::numeric_limits<double>::infinity();
  for (double r : ratios) worst = std::max(worst, r);
  if (!std::isfinite(worst)) worst = 0.0;
  ConditionReport report;
  report.condition_id = ConditionId::Coercivity;
  report.worst_ratio = worst;
  report.num_samples = num_samples;
  report.sample_region_radius = region_radius;
  report.passed = worst <= 1.0 + 1e-9;
  return report;
}

namespace {

Matrix diffusion_jacobian_fd(const SodeProblem& problem, double t, const Vector& x, int r) {
  const double h = 1e-7 * (1.0 + x.norm());
  Matrix out(problem.dim, problem.dim);
  Vector xp = x, xm = x, gp(problem.dim), gm(problem.dim);
  for (int j = 0; j < problem.dim; ++j) {
    xp[j] += h;
    xm[j] -= h;
    problem.diffusion(t, xp, r, gp);
    problem.diffusion(t, xm, r, gm);
    out.col(j) = (gp - gm) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return out;
}

double operator_norm(const Matrix& a) {
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  return a.jacobiSvd().singularValues()[0];
}

}  // namespace

ConditionReport verify_local_lipschitz(const SodeProblem& problem, ConditionId which,
                                       double L, double q, double region_radius,
                                       long num_samples, std::uint64_t seed) {
  if (which != ConditionId::LocalLipschitzDriftJacobian &&
      which != ConditionId::LocalLipschitzDiffusionJacobian) {
    throw std::invalid_argument("verify_local_lipschitz: unsupported condition id");
  }
  const bool drift_case = which == ConditionId::LocalLipschitzDriftJacobian;
  const double exponent = drift_case ? q - 2.0 : 0.5 * (q - 3.0);
  return run_pair_check(
      problem, which, region_radius, num_samples, seed, /*workers=*/1,
      [&](double t, const Vector& x1, const Vector& x2) {
        const double rhs_weight =
            std::pow(1.0 + x1.norm() + x2.norm(), exponent) * (x1 - x2).norm();
        double lhs = 0.0;
        if (drift_case) {
          lhs = operator_norm(problem.drift_jacobian_at(t, x1) -
                              problem.drift_jacobian_at(t, x2));
        } else {
          for (int r = 0; r < problem.num_drivers; ++r) {
            lhs = std::max(lhs, operator_norm(diffusion_jacobian_fd(problem, t, x1, r) -
                                              diffusion_jacobian_fd(problem, t, x2, r)));
          }
        }
        return lhs / (L * rhs_weight);
      });
}

double max_derivative_product_deviation(const SodeProblem& problem, double region_radius,
                                        long num_samples, std::uint64_t seed) {
  const double fd_step = 1e-5;
  double worst = 0.0;
  Vector gp(problem.dim), gm(problem.dim), dir(problem.dim), grr(problem.dim);
  for (long j = 0; j < num_samples; ++j) {
    RandomStream stream(seed, static_cast<std::uint64_t>(j), 0,
                        StreamPurpose::ConditionSampling);
    const double t = problem.horizon_T * stream.uniform();
    const Vector x = ball_point(stream, problem.dim, region_radius);
    for (int r1 = 0; r1 < problem.num_drivers; ++r1) {
      for (int r2 = 0; r2 < problem.num_drivers; ++r2) {
        problem.diffusion(t, x, r2, dir);
        problem.diffusion(t, x + fd_step * dir, r1, gp);
        problem.diffusion(t, x - fd_step * dir, r1, gm);
        problem.diffusion_deriv_product(t, x, r1, r2, grr);
        const Vector fd = (gp - gm) / (2.0 * fd_step);
        worst = std::max(worst, (fd - grr).norm() / std::max(1.0, grr.norm()));
      }
    }
  }
  return worst;
}

bool check_noise_structure(const SodeProblem& problem, double region_radius,
                           long num_samples, std::uint64_t seed) {
  Vector a(problem.dim), b(problem.dim);
  for (long j = 0; j < num_samples; ++j) {
    RandomStream stream(seed, static_cast<std::uint64_t>(j), 0,
                        StreamPurpose::ConditionSampling);
    const double t = problem.horizon_T * stream.uniform();
    const Vector x = ball_point(stream, problem.dim, region_radius);
    for (int r1 = 0; r1 < problem.num_drivers; ++r1) {
      for (int r2 = 0; r2 < problem.num_drivers; ++r2) {
        problem.diffusion_deriv_product(t, x, r1, r2, a);
        if (problem.noise_structure == NoiseStructure::Additive) {
          if (a.norm() > 1e-12) return false;
        } else if (problem.noise_structure == NoiseStructure::Commutative) {
          problem.diffusion_deriv_product(t, x, r2, r1, b);
          if ((a - b).norm() > 1e-12 * (1.0 + a.norm())) return false;
        } else if (problem.noise_structure == NoiseStructure::Diagonal && r1 != r2) {
          if (a.norm() > 1e-12) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace sodeint
