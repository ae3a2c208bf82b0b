#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sodeint/rng.hpp"

using namespace sodeint;

TEST_CASE("normal_icdf matches reference quantiles") {
  CHECK(normal_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  // Phi(1.959963984540054) = 0.975
  CHECK(normal_icdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  // Phi(1) = 0.8413447460685429
  CHECK(normal_icdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-12));
  // Phi(-3) = 0.0013498980316300946 (far tail branch)
  CHECK(normal_icdf(0.0013498980316300946) == doctest::Approx(-3.0).epsilon(1e-12));
  // deep tail, r > 5 branch
  CHECK(normal_icdf(1e-15) == doctest::Approx(-7.941345326170997).epsilon(1e-9));
}

TEST_CASE("normal_icdf is antisymmetric and rejects the boundary") {
  for (double u : {0.01, 0.2, 0.37, 0.49}) {
    CHECK(normal_icdf(u) == doctest::Approx(-normal_icdf(1.0 - u)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(normal_icdf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_icdf(1.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_icdf(-0.5), std::invalid_argument);
}

TEST_CASE("streams are reproducible and keyed by every field") {
  RandomStream a(42, 7, 0), b(42, 7, 0), c(42, 7, 1), d(43, 7, 0);
  RandomStream e(42, 7, 0, StreamPurpose::ConditionSampling);
  double first_a = a.normal();
  CHECK(first_a == b.normal());
  CHECK(first_a != c.normal());
  CHECK(first_a != d.normal());
  CHECK(first_a != e.normal());
}

TEST_CASE("normal draws have the right first moments") {
  RandomStream stream(123, 0, 0);
  const long n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double z = stream.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}
