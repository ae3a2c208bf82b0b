#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sodeint/analysis.hpp"
#include "test_util.hpp"

using namespace sodeint;

TEST_CASE("EOC formula on hand inputs") {
  // paper-style pairs: PEM 0.0087 -> 0.0045 gives 0.95, PMil 0.0081 -> 0.0040
  // gives 1.02 (both at h = 2^-5 -> 2^-6)
  const std::vector<double> hs{0x1.0p-5, 0x1.0p-6};
  const auto pem = eoc({0.0087, 0.0045}, hs);
  CHECK(pem[0] == doctest::Approx(0.95).epsilon(0.005));
  const auto pmil = eoc({0.0081, 0.0040}, hs);
  CHECK(pmil[0] == doctest::Approx(1.02).epsilon(0.005));
  CHECK(eoc({0.5, 0.5}, hs)[0] == 0.0);
  CHECK_THROWS_AS(eoc({0.1, 0.0}, hs), std::domain_error);
  CHECK_THROWS_AS(eoc({0.1}, {0.5}), std::invalid_argument);
}

TEST_CASE("a scheme against itself on the same grid has error exactly zero") {
  const ParametricProblem dw = make_double_well(0.3);
  const auto report = strong_error(
      dw.sode, SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode),
      {0x1.0p-4}, 500, 7,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-4), 1.0);
  CHECK(report.rows[0].rms_error == 0.0);
  CHECK(report.rows[0].ci_half_width == 0.0);
}

TEST_CASE("classical orders on geometric Brownian motion (desk scale)") {
  const ParametricProblem gbm = make_gbm(1.0, 0.8);
  const std::vector<double> hs{0x1.0p-4, 0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8};
  const ReferenceSpec exact = ReferenceSpec::exact_solution(gbm, 0x1.0p-10);
  const auto milstein = strong_error(
      gbm.sode, SchemeSpec::for_problem(SchemeKind::Milstein, gbm.sode), hs, 10000, 11,
      exact, 1.0);
  const auto em = strong_error(
      gbm.sode, SchemeSpec::for_problem(SchemeKind::EulerMaruyama, gbm.sode), hs, 4000,
      11, exact, 1.0);
  // last two pairwise EOC entries for Milstein near one
  CHECK(*milstein.rows[3].eoc > 0.85);
  CHECK(*milstein.rows[3].eoc < 1.15);
  CHECK(*milstein.rows[4].eoc > 0.85);
  CHECK(*milstein.rows[4].eoc < 1.15);
  // overall least-squares slopes
  std::vector<double> lm, le, lh;
  for (std::size_t k = 0; k < hs.size(); ++k) {
    lh.push_back(std::log(hs[k]));
    lm.push_back(std::log(milstein.rows[k].rms_error));
    le.push_back(std::log(em.rows[k].rms_error));
  }
  CHECK(testutil::ls_slope(lh, lm) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(testutil::ls_slope(lh, le) == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("error reports are bit-identical across worker counts") {
  const ParametricProblem dw = make_double_well(0.3);
  const SchemeSpec pmil = SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode);
  const ReferenceSpec ref = ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein,
                                                       0x1.0p-8);
  const std::vector<double> hs{0x1.0p-4, 0x1.0p-5};
  const auto one = strong_error(dw.sode, pmil, hs, 600, 21, ref, 1.0, 1);
  const auto four = strong_error(dw.sode, pmil, hs, 600, 21, ref, 1.0, 4);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    CHECK(one.rows[k].rms_error == four.rows[k].rms_error);
    CHECK(one.rows[k].ci_half_width == four.rows[k].ci_half_width);
    CHECK(one.rows[k].projection_count == four.rows[k].projection_count);
  }
  std::ostringstream csv1, csv4;
  one.write_csv(csv1);
  four.write_csv(csv4);
  CHECK(csv1.str() == csv4.str());
}

TEST_CASE("halving the reference resolution moves the error less than its CI") {
  const ParametricProblem dw = make_double_well(0.3);
  const SchemeSpec pmil = SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode);
  const std::vector<double> hs{0x1.0p-4, 0x1.0p-6};
  const auto coarse_ref = strong_error(
      dw.sode, pmil, hs, 4000, 31,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-12), 1.0);
  const auto fine_ref = strong_error(
      dw.sode, pmil, hs, 4000, 31,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-13), 1.0);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    CHECK(std::abs(coarse_ref.rows[k].rms_error - fine_ref.rows[k].rms_error) <
          coarse_ref.rows[k].ci_half_width);
  }
  // same check for the oscillator's exact reference (Riemann sum refinement)
  const ParametricProblem osc = make_oscillator();
  const auto r12 = strong_error(
      osc.sode, SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, osc.sode),
      {0x1.0p-5}, 2000, 31, ReferenceSpec::exact_solution(osc, 0x1.0p-12), 1.0);
  const auto r13 = strong_error(
      osc.sode, SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, osc.sode),
      {0x1.0p-5}, 2000, 31, ReferenceSpec::exact_solution(osc, 0x1.0p-13), 1.0);
  CHECK(std::abs(r12.rows[0].rms_error - r13.rows[0].rms_error) <
        r12.rows[0].ci_half_width);
}

TEST_CASE("sampled initial conditions flow through the harness deterministically") {
  ParametricProblem dw = make_double_well(0.3);
  dw.sode.initial_sampler = [](std::uint64_t seed, std::uint64_t sample) {
    RandomStream stream(seed, sample, 0, StreamPurpose::ProbeSampling);
    return Vector::Constant(1, 1.0 + stream.uniform());
  };
  const SchemeSpec pmil = SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode);
  // coupled self-reference still collapses to zero error (same sampled X0)
  const auto self = strong_error(
      dw.sode, pmil, {0x1.0p-4}, 300, 9,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-4), 1.0);
  CHECK(self.rows[0].rms_error == 0.0);
  const auto one = strong_error(
      dw.sode, pmil, {0x1.0p-4}, 300, 9,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-8), 1.0, 1);
  const auto four = strong_error(
      dw.sode, pmil, {0x1.0p-4}, 300, 9,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-8), 1.0, 4);
  CHECK(one.rows[0].rms_error == four.rows[0].rms_error);
  // closed-form references assume the fixed initial value
  ParametricProblem gbm = make_gbm(1.0, 0.5);
  gbm.sode.initial_sampler = dw.sode.initial_sampler;
  CHECK_THROWS_AS(
      strong_error(gbm.sode, SchemeSpec::for_problem(SchemeKind::Milstein, gbm.sode),
                   {0x1.0p-4}, 100, 9, ReferenceSpec::exact_solution(gbm, 0x1.0p-8), 1.0),
      std::invalid_argument);
}

TEST_CASE("overflowing samples are excluded and flagged") {
  const ParametricProblem dw = make_double_well(0.3, 4.0, 4.0);
  const SchemeSpec em = SchemeSpec::for_problem(SchemeKind::EulerMaruyama, dw.sode);
  const auto report = strong_error(
      dw.sode, em, {0x1.0p-1}, 100, 3,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-8), 4.0);
  CHECK(report.rows[0].excluded == 100);
  CHECK_FALSE(report.valid);
}

TEST_CASE("strong_error validates its inputs") {
  const ParametricProblem dw = make_double_well(0.3);
  const SchemeSpec pmil = SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode);
  const ReferenceSpec ref = ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein,
                                                       0x1.0p-8);
  CHECK_THROWS_AS(strong_error(dw.sode, pmil, {0x1.0p-4}, 1, 1, ref, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(strong_error(dw.sode, pmil, {}, 100, 1, ref, 1.0),
                  std::invalid_argument);
  // fine resolution must divide h
  const ReferenceSpec bad = ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein,
                                                       0.3);
  CHECK_THROWS_AS(strong_error(dw.sode, pmil, {0.5}, 100, 1, bad, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ReferenceSpec::exact_solution(dw, 0x1.0p-8), std::invalid_argument);
}

TEST_CASE("local error probe: deterministic drift has second-order mean part") {
  ParametricProblem p = make_additive_linear(1.0, 0.0);  // sigma = 0
  const SchemeSpec em = SchemeSpec::for_problem(SchemeKind::EulerMaruyama, p.sode);
  const auto probe = local_error_probe(p.sode, em, Vector::Constant(1, 1.0), 0.0,
                                       {0x1.0p-4, 0x1.0p-5, 0x1.0p-6, 0x1.0p-7}, 4, 5,
                                       0x1.0p-14);
  CHECK(probe.mean_slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("local error probe: split-step Euler on additive noise") {
  const ParametricProblem p = make_additive_linear(1.0, 0.5);
  const SchemeSpec ssbe = SchemeSpec::for_problem(SchemeKind::SplitStepBackwardEuler,
                                                  p.sode);
  const auto probe = local_error_probe(
      p.sode, ssbe, Vector::Constant(1, 1.0), 0.0,
      {0x1.0p-4, 0x1.0p-5, 0x1.0p-6, 0x1.0p-7, 0x1.0p-8, 0x1.0p-9}, 20000, 5, 0x1.0p-16);
  CHECK(probe.fluct_slope > 1.35);
  CHECK(probe.fluct_slope < 1.65);
  CHECK_FALSE(probe.inconclusive);
}

TEST_CASE("local error probe validates deltas") {
  const ParametricProblem p = make_additive_linear(1.0, 0.5);
  const SchemeSpec ssbe = SchemeSpec::for_problem(SchemeKind::SplitStepBackwardEuler,
                                                  p.sode);
  CHECK_THROWS_AS(local_error_probe(p.sode, ssbe, Vector::Constant(1, 1.0), 0.0,
                                    {0x1.0p-5, 0x1.0p-4}, 100, 5),
                  std::invalid_argument);
}

TEST_CASE("projection rate on the double well") {
  const ParametricProblem dw = make_double_well(0.3);
  const SchemeSpec pem = SchemeSpec::for_problem(SchemeKind::ProjectedEM, dw.sode);
  // paper-scale fraction at h = 2^-4 is about 5.1%
  const auto coarse = projection_rate(dw.sode, pem, 0x1.0p-4, 5000, 17);
  CHECK(coarse.fraction > 0.035);
  CHECK(coarse.fraction < 0.07);
  // no events at h = 2^-6
  const auto fine = projection_rate(dw.sode, pem, 0x1.0p-6, 5000, 17);
  CHECK(fine.count == 0);
  // a trajectory pinned near zero never approaches the ball boundary
  const ParametricProblem still = make_double_well(1e-6, 0.0);
  CHECK(projection_rate(still.sode, pem, 0x1.0p-4, 2000, 17).count == 0);
  // applicability
  const SchemeSpec em = SchemeSpec::for_problem(SchemeKind::EulerMaruyama, dw.sode);
  CHECK_THROWS_AS(projection_rate(dw.sode, em, 0x1.0p-4, 100, 1), std::invalid_argument);
}

TEST_CASE("timing sweep produces positive, workload-ordered timings") {
  const ParametricProblem dw = make_double_well(0.3);
  std::vector<SchemeSpec> schemes{
      SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, dw.sode),
      SchemeSpec::for_problem(SchemeKind::SplitStepBackwardMilstein, dw.sode)};
  const auto rows = timing_sweep(
      dw.sode, schemes, {0x1.0p-4, 0x1.0p-10}, 2000, 5,
      ReferenceSpec::fine_scheme(SchemeKind::ProjectedMilstein, 0x1.0p-10), 1.0);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) CHECK(row.cpu_seconds > 0.0);
  // 64x the steps costs more time
  CHECK(rows[1].cpu_seconds > rows[0].cpu_seconds);
  // the implicit scheme costs at least as much as the explicit one at equal h
  CHECK(rows[1].scheme == SchemeKind::ProjectedMilstein);
  CHECK(rows[3].scheme == SchemeKind::SplitStepBackwardMilstein);
  CHECK(rows[3].cpu_seconds > rows[1].cpu_seconds * 0.8);
}
