#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sodeint/noise.hpp"
#include "sodeint/sde_model.hpp"
#include "sodeint/types.hpp"

namespace sodeint {

enum class SchemeKind {
  EulerMaruyama,
  Milstein,
  ProjectedEM,
  ProjectedMilstein,
  SplitStepBackwardEuler,
  SplitStepBackwardMilstein,
};

bool is_projected(SchemeKind kind);
bool is_split_step(SchemeKind kind);
bool is_milstein_type(SchemeKind kind);
std::string to_string(SchemeKind kind);        // short id: em, milstein, pem, ...
SchemeKind scheme_from_string(const std::string& name);

enum class ImplicitSolverKind { NewtonFull, NewtonFixedIters, CardanoScalarCubic };

std::string to_string(ImplicitSolverKind kind);
ImplicitSolverKind implicit_solver_from_string(const std::string& name);

struct ImplicitSolverSpec {
  ImplicitSolverKind kind = ImplicitSolverKind::NewtonFull;
  int fixed_iters = 3;        // NewtonFixedIters only
  double tolerance = 1e-12;   // residual <= tolerance * (1 + |x|)
  int max_iters = 50;         // NewtonFull only
};

/// A scheme plus its parameters.  for_problem() fills the defaults:
/// alpha = 1 / (2(q-1)) for projected schemes; upper step bound 1 for
/// projected and explicit schemes, (1-1e-6)/L for split-step Euler, and
/// (1-1e-6) * min(1/L, 2 eta2/eta1) for split-step Milstein when eta1, eta2
/// are available.  The bound is enforced as a hard precondition: the
/// convergence guarantees only hold beneath it.
struct SchemeSpec {
  SchemeKind kind = SchemeKind::EulerMaruyama;
  double alpha = 0.0;
  double upper_step_bound = 1.0;
  ImplicitSolverSpec solver;

  static SchemeSpec for_problem(SchemeKind kind, const SodeProblem& problem);
  void validate(const SodeProblem& problem) const;
};

/// Deterministic step sizes h_1..h_N with their grid points t_n = sum h_i.
struct StepGrid {
  std::vector<double> steps;
  std::vector<double> grid_points;  // size N+1, grid_points[0] = 0

  static StepGrid uniform(double T, double h);
  static StepGrid from_steps(std::vector<double> steps);

  std::size_t num_steps() const { return steps.size(); }
  double horizon() const { return grid_points.back(); }
};

struct StepMeta {
  bool projected = false;
  int newton_iters = 0;
  double newton_residual = 0.0;
};

/// min(1, delta^{-alpha} |x|^{-1}) x: projection onto the ball of radius
/// delta^{-alpha}.  Total: inside the ball (including 0) x is returned
/// unchanged and |x|^{-1} is never formed.
Vector project_to_ball(const Vector& x, double delta, double alpha);

/// Solves y - delta f(t, y) = x for y; requires delta < 1/L so the map is a
/// homeomorphism with a unique solution.  NewtonFull damps (step halving)
/// from the explicit predictor x + delta f(t,x) until the residual meets
/// tolerance * (1 + |x|); NewtonFixedIters performs exactly k plain
/// iterations; CardanoScalarCubic solves scalar cubic drifts in closed form.
Vector implicit_solve(const SodeProblem& problem, double t, double delta, const Vector& x,
                      const ImplicitSolverSpec& solver, StepMeta* meta = nullptr);

/// One step of the scheme from state x at time t with the given increments.
/// Explicit schemes evaluate coefficients at t, split-step schemes at
/// t + delta (the right endpoint).  Milstein-type schemes add the double sum
/// over g^{r1,r2} paired with the swapped-index iterated integrals.
Vector step(const SodeProblem& problem, const SchemeSpec& scheme, const Vector& x,
            double t, const StepIncrements& inc, StepMeta* meta = nullptr);

struct TrajectoryRecord {
  Matrix states;                    // (N+1) x d; row 0 is the initial value
  std::vector<std::uint8_t> projected;  // size N+1, projected[i]: step i projected
  long projection_events = 0;       // steps whose pre-projection state left the ball
  long total_newton_iters = 0;
  double max_residual = 0.0;
};

/// Folds step() over the grid, drawing increments from the path by exact
/// coarsening.  Grid points must land on fine grid points (within 1e-12).
/// x0 overrides the problem initial value; t0 shifts coefficient times.
TrajectoryRecord integrate(const SodeProblem& problem, const SchemeSpec& scheme,
                           const StepGrid& grid, const BrownianPath& path,
                           const Vector* x0 = nullptr, double t0 = 0.0);

/// Debug export: one row per grid point, columns t, x_1..x_d, projected_flag.
void write_trajectory_csv(std::ostream& os, const StepGrid& grid,
                          const TrajectoryRecord& record);

}  // namespace sodeint
