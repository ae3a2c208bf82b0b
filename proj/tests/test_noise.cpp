#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sodeint/noise.hpp"
#include "test_util.hpp"

using namespace sodeint;

TEST_CASE("same (seed, sample_index) reproduces the path bit for bit") {
  const BrownianPath a = generate_path(42, 7, 1.0, 0x1.0p-8, 2);
  const BrownianPath b = generate_path(42, 7, 1.0, 0x1.0p-8, 2);
  CHECK(testutil::same_values(a.increments, b.increments));
  const BrownianPath c = generate_path(42, 8, 1.0, 0x1.0p-8, 2);
  CHECK_FALSE(testutil::same_values(a.increments, c.increments));
}

TEST_CASE("generate_path validates its arguments") {
  CHECK_THROWS_AS(generate_path(1, 0, -1.0, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_path(1, 0, 1.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_path(1, 0, 1.0, 0.3, 1), std::invalid_argument);  // 0.3 ∤ 1
  CHECK_THROWS_AS(generate_path(1, 0, 1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("increment variance and cross-driver correlation at CLT scale") {
  const double dt = 0x1.0p-4;
  const long n = 1000000;
  const BrownianPath path = generate_path(9001, 0, n * dt, dt, 2);
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (long i = 0; i < n; ++i) {
    const double a = path.increments(i, 0), b = path.increments(i, 1);
    s1 += a;
    s2 += b;
    s11 += a * a;
    s22 += b * b;
    s12 += a * b;
  }
  const double v1 = s11 / n - (s1 / n) * (s1 / n);
  const double v2 = s22 / n - (s2 / n) * (s2 / n);
  const double corr = (s12 / n - (s1 / n) * (s2 / n)) / std::sqrt(v1 * v2);
  CHECK(v1 / dt == doctest::Approx(1.0).epsilon(0.01));
  CHECK(v2 / dt == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(corr) < 0.01);  // 3/sqrt(n) would already do
}

TEST_CASE("coarsen sums windows exactly") {
  const BrownianPath path = generate_path(5, 3, 1.0, 0x1.0p-6, 2);
  const auto n = path.num_fine_steps;
  // single step window equals the row
  const Vector one = coarsen(path, 10, 11);
  CHECK(one[0] == path.increments(10, 0));
  CHECK(one[1] == path.increments(10, 1));
  // full window equals column totals
  const Vector all = coarsen(path, 0, n);
  CHECK(all[0] == doctest::Approx(path.increments.col(0).sum()).epsilon(1e-15));
  // adjacent windows add up exactly
  const Vector left = coarsen(path, 4, 20), right = coarsen(path, 20, 36);
  const Vector both = coarsen(path, 4, 36);
  CHECK((left + right - both).norm() < 1e-14);
  CHECK_THROWS_AS(coarsen(path, -1, 5), std::out_of_range);
  CHECK_THROWS_AS(coarsen(path, 5, 5), std::out_of_range);
  CHECK_THROWS_AS(coarsen(path, 0, n + 1), std::out_of_range);
}

namespace {

// hand-made path with prescribed increments
BrownianPath manual_path(const Matrix& increments, double fine_dt) {
  BrownianPath path;
  path.num_drivers = static_cast<int>(increments.cols());
  path.fine_dt = fine_dt;
  path.num_fine_steps = increments.rows();
  path.increments = increments;
  return path;
}

}  // namespace

TEST_CASE("iterated integrals: exact identities on prescribed increments") {
  // dW^2 == delta cancels the diagonal term exactly (dyadic pair: 0.25^2 is
  // exactly 0.0625); the decimal pair 0.2/0.04 cancels to rounding only
  Matrix inc1(1, 1);
  inc1 << 0.25;
  const StepIncrements scalar =
      iterated_integrals(manual_path(inc1, 0.0625), 0, 1, NoiseStructure::Scalar);
  CHECK(scalar.iterated(0, 0) == 0.0);
  CHECK(scalar.dw[0] == 0.25);
  CHECK(scalar.delta == 0.0625);
  Matrix inc1d(1, 1);
  inc1d << 0.2;
  const StepIncrements decimal =
      iterated_integrals(manual_path(inc1d, 0.04), 0, 1, NoiseStructure::Scalar);
  CHECK(std::abs(decimal.iterated(0, 0)) < 1e-17);

  // commutative split: both off-diagonal entries are dW1 dW2 / 2
  Matrix inc2(1, 2);
  inc2 << 1.0, 2.0;
  const StepIncrements comm =
      iterated_integrals(manual_path(inc2, 0.25), 0, 1, NoiseStructure::Commutative);
  CHECK(comm.iterated(0, 1) == 1.0);
  CHECK(comm.iterated(1, 0) == 1.0);
  // the symmetric sum is exactly the increment product
  CHECK(comm.iterated(0, 1) + comm.iterated(1, 0) == comm.dw[0] * comm.dw[1]);
  // diagonal entries: (dw^2 - delta)/2
  CHECK(comm.iterated(0, 0) == 0.5 * (1.0 - 0.25));
  CHECK(comm.iterated(1, 1) == 0.5 * (4.0 - 0.25));

  // diagonal structure zeroes the off-diagonal entries
  const StepIncrements diag =
      iterated_integrals(manual_path(inc2, 0.25), 0, 1, NoiseStructure::Diagonal);
  CHECK(diag.iterated(0, 1) == 0.0);
  CHECK(diag.iterated(1, 0) == 0.0);

  // additive noise carries no iterated terms at all
  const StepIncrements add =
      iterated_integrals(manual_path(inc2, 0.25), 0, 1, NoiseStructure::Additive);
  CHECK(add.iterated.isZero(0.0));
}

TEST_CASE("iterated integrals reject unsupported configurations") {
  const BrownianPath path = generate_path(1, 0, 1.0, 0.25, 2);
  CHECK_THROWS_AS(iterated_integrals(path, 0, 1, NoiseStructure::General),
                  std::invalid_argument);
  CHECK_THROWS_AS(iterated_integrals(path, 0, 1, NoiseStructure::Scalar),
                  std::invalid_argument);  // scalar means one driver
  CHECK_THROWS_AS(iterated_integrals(path, 3, 2, NoiseStructure::Commutative),
                  std::out_of_range);
}

TEST_CASE("iterated integral moments at Monte Carlo scale") {
  // E[I_(r)] = 0, E[I_(r)^2] = delta, E[I_(r,r)] = 0, E[I_(r,r)^2] = delta^2/2.
  const double delta = 0.01;
  const long n = 1000000;
  const BrownianPath path = generate_path(777, 0, n * delta, delta, 1);
  double s = 0, s2 = 0, q = 0, q2 = 0;
  for (long i = 0; i < n; ++i) {
    const double dw = path.increments(i, 0);
    const double irr = 0.5 * (dw * dw - delta);
    s += dw;
    s2 += dw * dw;
    q += irr;
    q2 += irr * irr;
  }
  CHECK(std::abs(s / n) <= 4.0 * std::sqrt(delta / n));
  CHECK((s2 / n) / delta == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(q / n) <= 3.0 * delta / std::sqrt(2.0 * n));
  CHECK((q2 / n) / (0.5 * delta * delta) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("binary path dump round-trips") {
  const BrownianPath path = generate_path(11, 4, 0.5, 0x1.0p-5, 2);
  std::stringstream buffer;
  write_path(buffer, path);
  const BrownianPath back = read_path(buffer);
  CHECK(back.seed == path.seed);
  CHECK(back.sample_index == path.sample_index);
  CHECK(back.num_drivers == path.num_drivers);
  CHECK(back.fine_dt == path.fine_dt);
  CHECK(back.num_fine_steps == path.num_fine_steps);
  CHECK(testutil::same_values(back.increments, path.increments));
}
