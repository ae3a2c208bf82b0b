#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "sodeint/problems.hpp"
#include "sodeint/rng.hpp"
#include "sodeint/schemes.hpp"
#include "test_util.hpp"

using namespace sodeint;
using nlohmann::json;

TEST_CASE("double well coefficients") {
  const ParametricProblem p = make_double_well(0.3);
  // equilibria of the gradient flow
  for (double x : {-1.0, 0.0, 1.0}) {
    CHECK(p.sode.drift_at(0.0, Vector::Constant(1, x))[0] == 0.0);
  }
  // hand value: gg'(2) = -2 (0.09)(2)(1-4) = 1.08, cross-checked against a
  // finite difference of g along g
  const Vector x2 = Vector::Constant(1, 2.0);
  CHECK(p.sode.diffusion_pair_at(0.0, x2, 0, 0)[0] == doctest::Approx(1.08).epsilon(1e-14));
  const double h = 1e-6;
  const double g_at = p.sode.diffusion_at(0.0, x2, 0)[0];
  const double fd = (p.sode.diffusion_at(0.0, Vector::Constant(1, 2.0 + h * g_at), 0)[0] -
                     p.sode.diffusion_at(0.0, Vector::Constant(1, 2.0 - h * g_at), 0)[0]) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(1.08).epsilon(1e-6));
  CHECK(p.sode.growth_rate_q == 3.0);
  CHECK(p.sode.noise_structure == NoiseStructure::Scalar);
  CHECK(p.sode.initial_value[0] == 2.0);
}

TEST_CASE("oscillator coefficients and commutativity") {
  const ParametricProblem p = make_oscillator();
  Vector e1(2);
  e1 << 1.0, 0.0;
  // g^2((1,0)) = sigma2 (0, 1)
  const Vector g2 = p.sode.diffusion_at(0.0, e1, 1);
  CHECK(g2[0] == 0.0);
  CHECK(g2[1] == doctest::Approx(0.6).epsilon(1e-15));
  // drift at (1,0) with mu = 0.4, theta = 1, sigma2 = 0.6:
  // ((0.4 - 1) - 0.18, 1) = (-0.78, 1)
  const Vector f = p.sode.drift_at(0.0, e1);
  CHECK(f[0] == doctest::Approx(-0.78).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(1.0).epsilon(1e-14));
  // commutativity on random points
  RandomStream stream(3, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    Vector x(2);
    x << 4.0 * (stream.uniform() - 0.5), 4.0 * (stream.uniform() - 0.5);
    const Vector a = p.sode.diffusion_pair_at(0.0, x, 0, 1);
    const Vector b = p.sode.diffusion_pair_at(0.0, x, 1, 0);
    CHECK((a - b).norm() == 0.0);
  }
  // X0 = 1.97 (cos, sin)(pi/4) = (1.3930.., 1.3930..)
  CHECK(p.sode.initial_value[0] == doctest::Approx(1.392999).epsilon(1e-6));
  CHECK(p.sode.initial_value[1] == doctest::Approx(1.392999).epsilon(1e-6));
  CHECK(p.sode.noise_structure == NoiseStructure::Commutative);
}

TEST_CASE("oscillator metadata satisfies its own conditions") {
  const ParametricProblem p = make_oscillator();
  const SodeProblem& s = p.sode;
  REQUIRE(s.eta1.has_value());
  REQUIRE(s.eta2.has_value());
  // closed form: (mu - s2^2/2) + eta1 (s1^2+s2^2) + eta2 (s1^2+s2^2)^2 <= L
  const double noise_sq = 0.25 + 0.36;
  const double lhs = (0.4 - 0.18) + *s.eta1 * noise_sq + *s.eta2 * noise_sq * noise_sq;
  CHECK(lhs <= s.monotonicity_L + 1e-12);
  CHECK(verify_monotonicity(s, s.eta, 6.0, 20000, 4).passed);
  CHECK(verify_ssbm_monotonicity(s, *s.eta1, *s.eta2, 6.0, 20000, 4).passed);
  CHECK(verify_coercivity(s, 14.0, 8.0, 20000, 4).passed);
}

TEST_CASE("exact oscillator solution") {
  OscillatorParams op;
  op.mu = 0.0;
  op.sigma1 = 0.0;
  op.sigma2 = 0.6;
  op.r0 = 1.0;
  op.phi0 = 0.4;
  const BrownianPath path = generate_path(12, 0, 2.0, 0x1.0p-10, 2);
  // sigma1 = 0, mu = 0: r(t) = (1 + 2 t)^(-1/2), deterministic
  const Vector xt = exact_oscillator(path, 1.5, path.fine_dt, op);
  CHECK(xt.norm() == doctest::Approx(0.5).epsilon(1e-12));
  // t = 0 returns the initial point
  const Vector x0 = exact_oscillator(path, 0.0, path.fine_dt, op);
  CHECK(x0[0] == doctest::Approx(std::cos(0.4)).epsilon(1e-15));
  CHECK(x0[1] == doctest::Approx(std::sin(0.4)).epsilon(1e-15));

  // sigma1 = 0, mu != 0: the integral is (e^{2 mu t} - 1) / (2 mu)
  OscillatorParams op2 = op;
  op2.mu = 0.4;
  const double t = 1.0;
  const Vector yt = exact_oscillator(path, t, path.fine_dt, op2);
  const double integral = (std::exp(2.0 * 0.4 * t) - 1.0) / (2.0 * 0.4);
  const double r_exact = std::exp(0.4 * t) / std::sqrt(1.0 + 2.0 * integral);
  CHECK(yt.norm() == doctest::Approx(r_exact).epsilon(4.0 * path.fine_dt));

  // the radius stays positive along random paths
  OscillatorParams op3;  // defaults, both noises active
  for (std::uint64_t j = 0; j < 20; ++j) {
    const BrownianPath sample = generate_path(900, j, 1.0, 0x1.0p-8, 2);
    for (double tt : {0.25, 0.5, 1.0}) {
      CHECK(exact_oscillator(sample, tt, sample.fine_dt, op3).norm() > 0.0);
    }
  }
  CHECK_THROWS_AS(exact_oscillator(path, 0.3, path.fine_dt, op), std::invalid_argument);
}

TEST_CASE("exact GBM solution") {
  const BrownianPath path = generate_path(44, 1, 1.0, 0x1.0p-8, 1);
  CHECK(exact_gbm(path, 1.0, 0.7, 0.0, 2.0) ==
        doctest::Approx(2.0 * std::exp(0.7)).epsilon(1e-13));
  CHECK(exact_gbm(path, 0.0, 0.7, 0.5, 2.0) == 2.0);
}

TEST_CASE("problem descriptors") {
  const ParametricProblem p = problem_from_json(
      json{{"family", "double_well"}, {"sigma", 0.3}, {"x0", 2.0}, {"T", 1.0}});
  CHECK(p.family == ProblemFamily::DoubleWell);
  CHECK(p.sode.initial_value[0] == 2.0);
  CHECK(p.sode.horizon_T == 1.0);
  CHECK(problem_from_json(json{{"family", "oscillator"}}).sode.dim == 2);
  CHECK(problem_from_json(json{{"family", "gbm"}, {"mu", 1.0}, {"sigma", 0.5}})
            .has_exact_solution());
  CHECK_THROWS_WITH_AS(problem_from_json(json{{"family", "heat_equation"}}),
                       doctest::Contains("unknown family"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(problem_from_json(json{{"family", "double_well"}, {"sigma", "x"}}),
                       doctest::Contains("problem.sigma"), std::invalid_argument);
  CHECK_THROWS_AS(problem_from_json(json::array()), std::invalid_argument);
}

TEST_CASE("sigma = 0 gradient flow settles into the equilibria") {
  // deterministic double well: trajectories approach -1, 0 or 1
  for (auto [x0, target] : {std::pair{2.0, 1.0}, {-0.5, -1.0}, {0.0, 0.0}}) {
    const ParametricProblem p = make_double_well(0.0, x0, 20.0);
    const BrownianPath path = generate_path(1, 0, 20.0, 0x1.0p-6, 1);
    const StepGrid grid = StepGrid::uniform(20.0, 0x1.0p-6);
    const SchemeSpec pmil = SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, p.sode);
    SchemeSpec ssbm = SchemeSpec::for_problem(SchemeKind::SplitStepBackwardMilstein, p.sode);
    ssbm.solver.kind = ImplicitSolverKind::CardanoScalarCubic;
    const auto a = integrate(p.sode, pmil, grid, path);
    const auto b = integrate(p.sode, ssbm, grid, path);
    CHECK(std::abs(a.states(grid.num_steps(), 0) - target) < 1e-3);
    CHECK(std::abs(b.states(grid.num_steps(), 0) - target) < 1e-3);
  }
}
