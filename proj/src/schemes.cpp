#include "sodeint/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace sodeint {

bool is_projected(SchemeKind kind) {
  return kind == SchemeKind::ProjectedEM || kind == SchemeKind::ProjectedMilstein;
}

bool is_split_step(SchemeKind kind) {
  return kind == SchemeKind::SplitStepBackwardEuler ||
         kind == SchemeKind::SplitStepBackwardMilstein;
}

bool is_milstein_type(SchemeKind kind) {
  return kind == SchemeKind::Milstein || kind == SchemeKind::ProjectedMilstein ||
         kind == SchemeKind::SplitStepBackwardMilstein;
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::EulerMaruyama: return "em";
    case SchemeKind::Milstein: return "milstein";
    case SchemeKind::ProjectedEM: return "pem";
    case SchemeKind::ProjectedMilstein: return "pmil";
    case SchemeKind::SplitStepBackwardEuler: return "ssbe";
    case SchemeKind::SplitStepBackwardMilstein: return "ssbm";
  }
  return "?";
}

SchemeKind scheme_from_string(const std::string& name) {
  if (name == "em") return SchemeKind::EulerMaruyama;
  if (name == "milstein") return SchemeKind::Milstein;
  if (name == "pem") return SchemeKind::ProjectedEM;
  if (name == "pmil") return SchemeKind::ProjectedMilstein;
  if (name == "ssbe") return SchemeKind::SplitStepBackwardEuler;
  if (name == "ssbm") return SchemeKind::SplitStepBackwardMilstein;
  throw std::invalid_argument("unknown scheme: " + name);
}

std::string to_string(ImplicitSolverKind kind) {
  switch (kind) {
    case ImplicitSolverKind::NewtonFull: return "newton";
    case ImplicitSolverKind::NewtonFixedIters: return "newton_fixed";
    case ImplicitSolverKind::CardanoScalarCubic: return "cardano";
  }
  return "?";
}

ImplicitSolverKind implicit_solver_from_string(const std::string& name) {
  if (name == "newton") return ImplicitSolverKind::NewtonFull;
  if (name == "newton_fixed") return ImplicitSolverKind::NewtonFixedIters;
  if (name == "cardano") return ImplicitSolverKind::CardanoScalarCubic;
  throw std::invalid_argument("unknown implicit solver: " + name);
}

SchemeSpec SchemeSpec::for_problem(SchemeKind kind, const SodeProblem& problem) {
  SchemeSpec spec;
  spec.kind = kind;
  const double L = problem.monotonicity_L;
  if (is_projected(kind)) {
    spec.alpha = 0.5 / (problem.growth_rate_q - 1.0);
    spec.upper_step_bound = 1.0;
  } else if (kind == SchemeKind::SplitStepBackwardMilstein && problem.eta1 &&
             problem.eta2) {
    spec.upper_step_bound =
        (1.0 - 1e-6) * std::min(1.0 / L, 2.0 * (*problem.eta2) / (*problem.eta1));
  } else if (is_split_step(kind)) {
    spec.upper_step_bound = (1.0 - 1e-6) / L;
  } else {
    spec.upper_step_bound = 1.0;
  }
  return spec;
}

void SchemeSpec::validate(const SodeProblem& problem) const {
  if (!(upper_step_bound > 0.0)) {
    throw std::invalid_argument("scheme: upper_step_bound must be positive");
  }
  if (is_projected(kind)) {
    if (!(alpha > 0.0)) {
      throw std::invalid_argument("scheme: projected schemes require alpha > 0");
    }
    if (upper_step_bound > 1.0) {
      throw std::invalid_argument(
          "scheme: projected schemes require upper_step_bound <= 1 (the projection "
          "radius delta^-alpha assumes step sizes at most 1)");
    }
  }
  if (is_split_step(kind) && upper_step_bound * problem.monotonicity_L >= 1.0) {
    throw std::invalid_argument(
        "scheme: split-step schemes require upper_step_bound < 1/L so the implicit "
        "step is uniquely solvable");
  }
}

StepGrid StepGrid::uniform(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) {
    throw std::invalid_argument("StepGrid::uniform: T and h must be positive");
  }
  const auto n = static_cast<std::int64_t>(std::llround(T / h));
  if (n < 1 || std::abs(static_cast<double>(n) * h - T) > 1e-9 * std::max(1.0, T)) {
    throw std::invalid_argument("StepGrid::uniform: h must divide T");
  }
  StepGrid grid;
  grid.steps.assign(static_cast<std::size_t>(n), h);
  grid.grid_points.resize(static_cast<std::size_t>(n) + 1);
  for (std::int64_t i = 0; i <= n; ++i) grid.grid_points[i] = static_cast<double>(i) * h;
  grid.grid_points.back() = T;
  return grid;
}

StepGrid StepGrid::from_steps(std::vector<double> steps) {
  StepGrid grid;
  grid.steps = std::move(steps);
  grid.grid_points.resize(grid.steps.size() + 1);
  grid.grid_points[0] = 0.0;
  for (std::size_t i = 0; i < grid.steps.size(); ++i) {
    if (!(grid.steps[i] > 0.0)) {
      throw std::invalid_argument("StepGrid: steps must be positive");
    }
    grid.grid_points[i + 1] = grid.grid_points[i] + grid.steps[i];
  }
  return grid;
}

Vector project_to_ball(const Vector& x, double delta, double alpha) {
  const double radius = std::pow(delta, -alpha);
  const double norm = x.norm();
  if (norm <= radius) return x;
  return (radius / norm) * x;
}

namespace {

struct Workspace {
  Vector xbar, coeff, out_acc;
  Vector y, f_y, resid, dy, y_trial, resid_trial;
  Matrix jac;

  void resize(int d) {
    xbar.resize(d);
    coeff.resize(d);
    out_acc.resize(d);
    y.resize(d);
    f_y.resize(d);
    resid.resize(d);
    dy.resize(d);
    y_trial.resize(d);
    resid_trial.resize(d);
    jac.resize(d, d);
  }
};

// residual of the implicit equation: F(y) = y - delta f(t,y) - x
void residual_at(const SodeProblem& problem, double t, double delta, const Vector& x,
                 const Vector& y, Vector& f_y, Vector& out) {
  problem.drift(t, y, f_y);
  out = y - delta * f_y - x;
}

void newton_direction(const SodeProblem& problem, double t, double delta, const Vector& y,
                      const Vector& resid, Workspace& ws) {
  const auto d = y.size();
  if (problem.drift_jacobian) {
    problem.drift_jacobian(t, y, ws.jac);
  } else {
    ws.jac = problem.drift_jacobian_at(t, y);
  }
  // system matrix I - delta J, solve (I - delta J) dy = -resid
  if (d == 1) {
    ws.dy[0] = -resid[0] / (1.0 - delta * ws.jac(0, 0));
    return;
  }
  if (d == 2) {
    const double a = 1.0 - delta * ws.jac(0, 0);
    const double b = -delta * ws.jac(0, 1);
    const double c = -delta * ws.jac(1, 0);
    const double e = 1.0 - delta * ws.jac(1, 1);
    const double det = a * e - b * c;
    ws.dy[0] = (-e * resid[0] + b * resid[1]) / det;
    ws.dy[1] = (c * resid[0] - a * resid[1]) / det;
    return;
  }
  ws.jac = -delta * ws.jac;
  ws.jac.diagonal().array() += 1.0;
  ws.dy = ws.jac.partialPivLu().solve(-resid);
}

void newton_solve(const SodeProblem& problem, double t, double delta, const Vector& x,
                  const ImplicitSolverSpec& solver, bool fixed_iterations, Workspace& ws,
                  StepMeta& meta) {
  // explicit Euler predictor
  problem.drift(t, x, ws.f_y);
  ws.y = x + delta * ws.f_y;
  residual_at(problem, t, delta, x, ws.y, ws.f_y, ws.resid);
  double res = ws.resid.norm();
  const double tol = solver.tolerance * (1.0 + x.norm());
  int iters = 0;
  if (fixed_iterations) {
    for (; iters < solver.fixed_iters; ++iters) {
      newton_direction(problem, t, delta, ws.y, ws.resid, ws);
      ws.y += ws.dy;
      residual_at(problem, t, delta, x, ws.y, ws.f_y, ws.resid);
      res = ws.resid.norm();
    }
  } else {
    while (res > tol && iters < solver.max_iters) {
      newton_direction(problem, t, delta, ws.y, ws.resid, ws);
      double lambda = 1.0;
      for (int k = 0; k < 60; ++k) {
        ws.y_trial = ws.y + lambda * ws.dy;
        residual_at(problem, t, delta, x, ws.y_trial, ws.f_y, ws.resid_trial);
        if (ws.resid_trial.norm() < res || lambda < 1e-12) break;
        lambda *= 0.5;
      }
      ws.y = ws.y_trial;
      ws.resid = ws.resid_trial;
      res = ws.resid.norm();
      ++iters;
    }
    if (res > tol || !std::isfinite(res)) {
      throw SolverError("implicit_solve: Newton did not reach tolerance", ws.y, res);
    }
  }
  meta.newton_iters += iters;
  meta.newton_residual = std::max(meta.newton_residual, res);
}

// Fits f(t, .) = c3 y^3 + c2 y^2 + c1 y + c0 from five evaluations and
// rejects drifts that are not scalar cubics.
void extract_cubic(const SodeProblem& problem, double t, double coeffs[4]) {
  if (problem.dim != 1) {
    throw std::invalid_argument("cardano solver requires a one-dimensional problem");
  }
  auto f = [&](double y) {
    Vector v(1), out(1);
    v[0] = y;
    problem.drift(t, v, out);
    return out[0];
  };
  const double f0 = f(0.0), f1 = f(1.0), fm1 = f(-1.0), f2 = f(2.0);
  const double c0 = f0;
  const double c2 = 0.5 * (f1 + fm1) - c0;
  const double odd = 0.5 * (f1 - fm1);  // c3 + c1
  const double c3 = (f2 - c0 - 4.0 * c2 - 2.0 * odd) / 6.0;
  const double c1 = odd - c3;
  auto cubic = [&](double y) { return ((c3 * y + c2) * y + c1) * y + c0; };
  for (double probe : {3.0, -2.0}) {
    const double expected = cubic(probe);
    if (std::abs(f(probe) - expected) > 1e-8 * (1.0 + std::abs(expected))) {
      throw std::invalid_argument("cardano solver: drift is not a cubic polynomial");
    }
  }
  const double scale = std::max({std::abs(c0), std::abs(c1), std::abs(c2), std::abs(c3)});
  if (std::abs(c3) <= 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("cardano solver: drift has no cubic term");
  }
  coeffs[0] = c0;
  coeffs[1] = c1;
  coeffs[2] = c2;
  coeffs[3] = c3;
}

double cardano_solve(const SodeProblem& problem, double t, double delta, double x) {
  double c[4];
  extract_cubic(problem, t, c);
  // y - delta f(y) = x  <=>  A y^3 + B y^2 + C y + D = 0
  const double A = -delta * c[3];
  const double B = -delta * c[2];
  const double C = 1.0 - delta * c[1];
  const double D = -delta * c[0] - x;
  const double b = B / A, cc = C / A, d0 = D / A;
  const double p = cc - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (!(disc > 0.0)) {
    // three real roots: the map is not strictly monotone at this step size
    throw SolverError("cardano solver: non-positive discriminant (map not monotone)",
                      Vector::Constant(1, x), std::numeric_limits<double>::infinity());
  }
  const double s = std::sqrt(disc);
  const double t1 = -0.5 * q + s;
  const double t2 = -0.5 * q - s;
  const double tm = std::abs(t1) >= std::abs(t2) ? t1 : t2;
  double z = 0.0;
  if (tm != 0.0) {
    const double w = std::cbrt(tm);
    z = w - p / (3.0 * w);
  }
  double y = z - b / 3.0;
  // one polish step on the exact polynomial
  const double fy = ((A * y + B) * y + C) * y + D;
  const double dfy = (3.0 * A * y + 2.0 * B) * y + C;
  if (dfy != 0.0) y -= fy / dfy;
  return y;
}

void implicit_solve_into(const SodeProblem& problem, double t, double delta,
                         const Vector& x, const ImplicitSolverSpec& solver, Workspace& ws,
                         StepMeta& meta) {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("implicit_solve: delta must be positive");
  }
  if (delta * problem.monotonicity_L >= 1.0) {
    throw std::invalid_argument(
        "implicit_solve: requires delta < 1/L for a unique solution");
  }
  switch (solver.kind) {
    case ImplicitSolverKind::NewtonFull:
      newton_solve(problem, t, delta, x, solver, false, ws, meta);
      break;
    case ImplicitSolverKind::NewtonFixedIters:
      newton_solve(problem, t, delta, x, solver, true, ws, meta);
      break;
    case ImplicitSolverKind::CardanoScalarCubic: {
      ws.y.resize(1);
      ws.y[0] = cardano_solve(problem, t, delta, x[0]);
      residual_at(problem, t, delta, x, ws.y, ws.f_y, ws.resid);
      meta.newton_residual = std::max(meta.newton_residual, ws.resid.norm());
      break;
    }
  }
}

// Adds sum_{r1,r2} g^{r1,r2} * iterated(r1, r2); iterated(r1, r2) carries the
// integral with swapped indices, matching the coefficient pairing of the
// Milstein recursion.  Structures with vanishing entries skip them so the
// zero off-diagonal values of diagonal noise are never consumed.
void add_double_sum(const SodeProblem& problem, double t_eval, const Vector& base,
                    const StepIncrements& inc, Workspace& ws, Vector& out) {
  const int m = problem.num_drivers;
  switch (inc.structure) {
    case NoiseStructure::Additive:
      return;
    case NoiseStructure::Scalar:
      problem.diffusion_deriv_product(t_eval, base, 0, 0, ws.coeff);
      out += inc.iterated(0, 0) * ws.coeff;
      return;
    case NoiseStructure::Diagonal:
      for (int r = 0; r < m; ++r) {
        problem.diffusion_deriv_product(t_eval, base, r, r, ws.coeff);
        out += inc.iterated(r, r) * ws.coeff;
      }
      return;
    case NoiseStructure::Commutative:
      for (int r1 = 0; r1 < m; ++r1) {
        for (int r2 = 0; r2 < m; ++r2) {
          problem.diffusion_deriv_product(t_eval, base, r1, r2, ws.coeff);
          out += inc.iterated(r1, r2) * ws.coeff;
        }
      }
      return;
    case NoiseStructure::General:
      throw std::invalid_argument("step: general noise is not supported");
  }
}

void step_into(const SodeProblem& problem, const SchemeSpec& scheme, const Vector& x,
               double t, const StepIncrements& inc, Workspace& ws, Vector& out,
               StepMeta& meta) {
  const double delta = inc.delta;
  if (!(delta > 0.0)) {
    throw std::invalid_argument("step: increment delta must be positive");
  }
  if (delta > scheme.upper_step_bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("step: step size exceeds the scheme's upper bound");
  }
  if (inc.structure != problem.noise_structure) {
    throw std::invalid_argument(
        "step: increment structure does not match the problem noise structure");
  }
  meta = StepMeta{};
  const int m = problem.num_drivers;
  if (is_split_step(scheme.kind)) {
    const double te = t + delta;  // coefficients at the right endpoint
    implicit_solve_into(problem, te, delta, x, scheme.solver, ws, meta);
    out = ws.y;
    for (int r = 0; r < m; ++r) {
      problem.diffusion(te, ws.y, r, ws.coeff);
      out += inc.dw[r] * ws.coeff;
    }
    if (is_milstein_type(scheme.kind)) {
      add_double_sum(problem, te, ws.y, inc, ws, out);
    }
  } else {
    const Vector* base = &x;
    if (is_projected(scheme.kind)) {
      const double radius = std::pow(delta, -scheme.alpha);
      const double norm = x.norm();
      if (norm > radius) {
        meta.projected = true;
        ws.xbar = (radius / norm) * x;
        base = &ws.xbar;
      }
    }
    problem.drift(t, *base, ws.coeff);
    out = *base + delta * ws.coeff;
    for (int r = 0; r < m; ++r) {
      problem.diffusion(t, *base, r, ws.coeff);
      out += inc.dw[r] * ws.coeff;
    }
    if (is_milstein_type(scheme.kind)) {
      add_double_sum(problem, t, *base, inc, ws, out);
    }
  }
  if (!out.allFinite()) {
    throw OverflowError("step: non-finite state at t = " + std::to_string(t));
  }
}

}  // namespace

Vector implicit_solve(const SodeProblem& problem, double t, double delta, const Vector& x,
                      const ImplicitSolverSpec& solver, StepMeta* meta) {
  Workspace ws;
  ws.resize(problem.dim);
  StepMeta local;
  implicit_solve_into(problem, t, delta, x, solver, ws, local);
  if (meta) *meta = local;
  return ws.y;
}

Vector step(const SodeProblem& problem, const SchemeSpec& scheme, const Vector& x,
            double t, const StepIncrements& inc, StepMeta* meta) {
  Workspace ws;
  ws.resize(problem.dim);
  Vector out(problem.dim);
  StepMeta local;
  step_into(problem, scheme, x, t, inc, ws, out, local);
  if (meta) *meta = local;
  return out;
}

TrajectoryRecord integrate(const SodeProblem& problem, const SchemeSpec& scheme,
                           const StepGrid& grid, const BrownianPath& path,
                           const Vector* x0, double t0) {
  scheme.validate(problem);
  const auto n_steps = static_cast<std::int64_t>(grid.num_steps());
  const double T = grid.horizon();
  // Map grid points to fine path indices; every grid point must land on the
  // fine grid so the coarse increments are exact sums.
  std::vector<std::int64_t> fine_index(n_steps + 1);
  for (std::int64_t n = 0; n <= n_steps; ++n) {
    const double tn = grid.grid_points[n];
    const auto idx = static_cast<std::int64_t>(std::llround(tn / path.fine_dt));
    if (idx < 0 || idx > path.num_fine_steps ||
        std::abs(static_cast<double>(idx) * path.fine_dt - tn) > 1e-12 * std::max(1.0, T)) {
      throw std::invalid_argument("integrate: grid point does not lie on the fine grid");
    }
    fine_index[n] = idx;
  }
  for (double h : grid.steps) {
    if (h > scheme.upper_step_bound * (1.0 + 1e-12)) {
      throw std::invalid_argument("integrate: a grid step exceeds the scheme's bound of " +
                                  std::to_string(scheme.upper_step_bound));
    }
  }
  Vector x = x0 ? *x0 : problem.initial_value;
  if (x.size() != problem.dim) {
    throw std::invalid_argument("integrate: initial value has wrong dimension");
  }
  TrajectoryRecord rec;
  rec.states.resize(n_steps + 1, problem.dim);
  rec.projected.assign(static_cast<std::size_t>(n_steps) + 1, 0);
  rec.states.row(0) = x;
  Workspace ws;
  ws.resize(problem.dim);
  StepIncrements inc;
  Vector next(problem.dim);
  StepMeta meta;
  for (std::int64_t i = 1; i <= n_steps; ++i) {
    iterated_integrals_into(path, fine_index[i - 1], fine_index[i],
                            problem.noise_structure, inc);
    try {
      step_into(problem, scheme, x, t0 + grid.grid_points[i - 1], inc, ws, next, meta);
    } catch (OverflowError& e) {
      e.step_index = i;
      throw;
    }
    rec.states.row(i) = next;
    rec.projected[i] = meta.projected ? 1 : 0;
    rec.projection_events += meta.projected ? 1 : 0;
    rec.total_newton_iters += meta.newton_iters;
    rec.max_residual = std::max(rec.max_residual, meta.newton_residual);
    x.swap(next);
  }
  return rec;
}

void write_trajectory_csv(std::ostream& os, const StepGrid& grid,
                          const TrajectoryRecord& record) {
  const auto d = record.states.cols();
  os << "t";
  for (Eigen::Index j = 0; j < d; ++j) os << ",x" << (j + 1);
  os << ",projected\n";
  for (Eigen::Index i = 0; i < record.states.rows(); ++i) {
    os << grid.grid_points[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) os << "," << record.states(i, j);
    os << "," << static_cast<int>(record.projected[static_cast<std::size_t>(i)]) << "\n";
  }
}

}  // namespace sodeint
