#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sodeint/problems.hpp"
#include "sodeint/schemes.hpp"

namespace sodeint {

/// How the "exact" endpoint of a sample path is produced: either a
/// closed-form solution evaluated on the path, or a designated scheme run on
/// the fine grid of the path.  fine_dt is the path resolution either way; it
/// must divide every coarse step size so the coupling is exact.
struct ReferenceSpec {
  double fine_dt = 0.0;
  std::optional<SchemeKind> scheme;
  std::function<Vector(const BrownianPath&, double)> exact;

  static ReferenceSpec fine_scheme(SchemeKind kind, double fine_dt);
  static ReferenceSpec exact_solution(const ParametricProblem& problem, double fine_dt);

  std::string describe() const;
};

struct ErrorRow {
  double h = 0.0;
  double rms_error = 0.0;
  double ci_half_width = 0.0;       // 95% CI on the RMS scale (delta method)
  std::optional<double> eoc;        // absent on the first row
  long projection_count = 0;        // trajectories with at least one projection
  long excluded = 0;                // overflowed samples dropped from this row
  double wall_time_s = 0.0;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  nlohmann::json config_echo;
  bool valid = true;  // false when any row excluded more than 0.1% of samples

  /// Fixed column order: h, error, eoc, projections, ci, seconds.  In
  /// convergence reports the seconds column is written as 0.000 so that
  /// repeated runs are byte-identical; pass include_timing for
  /// work-precision output.
  void write_csv(std::ostream& os, bool include_timing = false) const;
  nlohmann::json to_json() const;
};

/// Coupled strong-error estimate at the endpoint: for each sample one fine
/// path is drawn, the reference endpoint is computed on it, and every step
/// size h runs the scheme on the coarsened increments of the same path.
/// rms_error = sqrt(mean |X_h(T) - X_ref(T)|^2); the confidence half-width
/// is a 95% normal CI on the mean squared error mapped to the RMS scale.
/// Overflowed samples are excluded and counted; a row that loses more than
/// 0.1% of its samples invalidates the report.  Results are bit-identical
/// for every worker count.
ErrorReport strong_error(const SodeProblem& problem, const SchemeSpec& scheme,
                         const std::vector<double>& h_list, long num_samples,
                         std::uint64_t seed, const ReferenceSpec& reference, double T,
                         int workers = 1, const nlohmann::json& problem_echo = {});

/// Pairwise log-ratio slopes between consecutive (h, error) entries.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// Local-error order probe for a deterministic start x0 at time t: for each
/// delta, D_j = X_ref(t+delta) - Psi(x0, t, delta) over coupled samples, and
///   mean_part  = |mean D|          (expected slope gamma + 1 = 2),
///   fluct_part = sqrt(mean |D - mean D|^2)   (expected gamma + 1/2 = 3/2).
/// Slopes are least-squares fits of log(part) against log(delta).
struct ProbeResult {
  std::vector<double> deltas;
  std::vector<double> mean_part;
  std::vector<double> fluct_part;
  double mean_slope = 0.0;
  double fluct_slope = 0.0;
  bool inconclusive = false;  // mean below 3x its standard error at max delta
};

ProbeResult local_error_probe(const SodeProblem& problem, const SchemeSpec& scheme,
                              const Vector& x0, double t,
                              const std::vector<double>& deltas, long num_samples,
                              std::uint64_t seed, double fine_dt = 0x1.0p-16,
                              int workers = 1);

struct ProjectionRate {
  long count = 0;
  double fraction = 0.0;
};

/// Fraction of trajectories of a projected scheme with at least one
/// projection event at step size h over [0, T].
ProjectionRate projection_rate(const SodeProblem& problem, const SchemeSpec& scheme,
                               double h, long num_samples, std::uint64_t seed,
                               int workers = 1);

struct TimingRow {
  SchemeKind scheme;
  double h = 0.0;
  double rms_error = 0.0;
  double cpu_seconds = 0.0;
};

/// Work-precision sweep: strong_error per scheme with wall-clock timing.
std::vector<TimingRow> timing_sweep(const SodeProblem& problem,
                                    const std::vector<SchemeSpec>& schemes,
                                    const std::vector<double>& h_list, long num_samples,
                                    std::uint64_t seed, const ReferenceSpec& reference,
                                    double T, int workers = 1);

}  // namespace sodeint
