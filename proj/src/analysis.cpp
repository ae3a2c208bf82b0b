#include "sodeint/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "sodeint/parallel.hpp"

namespace sodeint {

using nlohmann::json;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ReferenceSpec ReferenceSpec::fine_scheme(SchemeKind kind, double fine_dt) {
  ReferenceSpec ref;
  ref.fine_dt = fine_dt;
  ref.scheme = kind;
  return ref;
}

ReferenceSpec ReferenceSpec::exact_solution(const ParametricProblem& problem,
                                            double fine_dt) {
  if (!problem.has_exact_solution()) {
    throw std::invalid_argument("reference: family " + to_string(problem.family) +
                                " has no exact solution; use a scheme reference");
  }
  ReferenceSpec ref;
  ref.fine_dt = fine_dt;
  // Take the problem by value: the reference must stay valid on its own.
  ref.exact = [problem](const BrownianPath& path, double t) {
    return problem.exact_endpoint(path, t);
  };
  return ref;
}

std::string ReferenceSpec::describe() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", fine_dt);
  if (exact) return std::string("exact(fine_dt=") + buf + ")";
  if (scheme) return to_string(*scheme) + "(fine_dt=" + buf + ")";
  return "unset";
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2) {
    throw std::invalid_argument("eoc: need equally sized lists of length >= 2");
  }
  std::vector<double> out(errors.size() - 1);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i - 1] > 0.0)) {
      throw std::domain_error("eoc: undefined for non-positive error at row " +
                              std::to_string(i));
    }
    out[i - 1] = (std::log(errors[i]) - std::log(errors[i - 1])) /
                 (std::log(hs[i]) - std::log(hs[i - 1]));
  }
  return out;
}

ErrorReport strong_error(const SodeProblem& problem, const SchemeSpec& scheme,
                         const std::vector<double>& h_list, long num_samples,
                         std::uint64_t seed, const ReferenceSpec& reference, double T,
                         int workers, const json& problem_echo) {
  if (num_samples < 2) {
    throw std::invalid_argument("strong_error: need at least two samples");
  }
  if (h_list.empty()) {
    throw std::invalid_argument("strong_error: h_list must not be empty");
  }
  if (!(reference.fine_dt > 0.0)) {
    throw std::invalid_argument("strong_error: reference fine_dt must be positive");
  }
  if (!reference.exact && !reference.scheme) {
    throw std::invalid_argument("strong_error: reference must name a scheme or an exact "
                                "solution");
  }
  if (reference.exact && problem.initial_sampler) {
    throw std::invalid_argument(
        "strong_error: closed-form references assume the fixed initial value; use a "
        "scheme reference with a sampled initial condition");
  }
  scheme.validate(problem);
  for (double h : h_list) {
    const double ratio = h / reference.fine_dt;
    if (std::abs(ratio - std::llround(ratio)) > 1e-9 || ratio < 1.0) {
      throw std::invalid_argument(
          "strong_error: reference fine_dt must divide every step size");
    }
  }

  const std::size_t n_h = h_list.size();
  std::vector<StepGrid> grids;
  grids.reserve(n_h);
  for (double h : h_list) grids.push_back(StepGrid::uniform(T, h));
  const StepGrid fine_grid = StepGrid::uniform(T, reference.fine_dt);
  SchemeSpec ref_scheme;
  if (reference.scheme) ref_scheme = SchemeSpec::for_problem(*reference.scheme, problem);

  // Per-sample slots; the reduction below walks them in index order, so the
  // result does not depend on the worker count.
  std::vector<std::vector<double>> sq(n_h, std::vector<double>(num_samples, 0.0));
  std::vector<std::vector<std::uint8_t>> projected(
      n_h, std::vector<std::uint8_t>(num_samples, 0));
  std::vector<std::vector<std::uint8_t>> excluded(
      n_h, std::vector<std::uint8_t>(num_samples, 0));
  const int n_workers = std::max(1, workers);
  std::vector<std::vector<double>> time_acc(
      static_cast<std::size_t>(n_workers), std::vector<double>(n_h + 1, 0.0));

  parallel_samples(num_samples, workers, [&](std::int64_t j, int worker) {
    thread_local BrownianPath path;
    auto& times = time_acc[static_cast<std::size_t>(worker)];
    double t0 = now_seconds();
    generate_path_into(seed, static_cast<std::uint64_t>(j), T, reference.fine_dt,
                       problem.num_drivers, path);
    Vector x0;
    const Vector* x0_ptr = nullptr;
    if (problem.initial_sampler) {
      x0 = problem.initial_sampler(seed, static_cast<std::uint64_t>(j));
      x0_ptr = &x0;
    }
    Vector ref_endpoint;
    if (reference.exact) {
      ref_endpoint = reference.exact(path, T);
    } else {
      ref_endpoint = integrate(problem, ref_scheme, fine_grid, path, x0_ptr)
                         .states.row(fine_grid.num_steps())
                         .transpose();
    }
    double t1 = now_seconds();
    times[n_h] += t1 - t0;
    for (std::size_t k = 0; k < n_h; ++k) {
      const double tk0 = now_seconds();
      try {
        const TrajectoryRecord rec = integrate(problem, scheme, grids[k], path, x0_ptr);
        const Vector endpoint = rec.states.row(grids[k].num_steps()).transpose();
        sq[k][j] = (endpoint - ref_endpoint).squaredNorm();
        projected[k][j] = rec.projection_events > 0 ? 1 : 0;
      } catch (const OverflowError&) {
        excluded[k][j] = 1;
      }
      times[k] += now_seconds() - tk0;
    }
  });

  ErrorReport report;
  report.rows.resize(n_h);
  std::vector<double> errors, used_h;
  for (std::size_t k = 0; k < n_h; ++k) {
    double sum = 0.0, sum2 = 0.0;
    long kept = 0, n_proj = 0, n_excl = 0;
    for (long j = 0; j < num_samples; ++j) {
      if (excluded[k][j]) {
        ++n_excl;
        continue;
      }
      sum += sq[k][j];
      sum2 += sq[k][j] * sq[k][j];
      n_proj += projected[k][j];
      ++kept;
    }
    ErrorRow& row = report.rows[k];
    row.h = h_list[k];
    row.projection_count = n_proj;
    row.excluded = n_excl;
    if (kept > 1) {
      const double mse = sum / static_cast<double>(kept);
      const double var =
          std::max(0.0, (sum2 - static_cast<double>(kept) * mse * mse) /
                            static_cast<double>(kept - 1));
      row.rms_error = std::sqrt(mse);
      const double ci_mse = 1.96 * std::sqrt(var / static_cast<double>(kept));
      row.ci_half_width = row.rms_error > 0.0 ? ci_mse / (2.0 * row.rms_error) : 0.0;
    }
    for (int w = 0; w < n_workers; ++w) row.wall_time_s += time_acc[w][k];
    if (n_excl > 0 && static_cast<double>(n_excl) > 1e-3 * static_cast<double>(num_samples)) {
      report.valid = false;
    }
    if (k > 0 && row.rms_error > 0.0 && report.rows[k - 1].rms_error > 0.0) {
      row.eoc = (std::log(row.rms_error) - std::log(report.rows[k - 1].rms_error)) /
                (std::log(row.h) - std::log(report.rows[k - 1].h));
    }
  }

  report.config_echo = json{{"scheme", to_string(scheme.kind)},
                            {"alpha", scheme.alpha},
                            {"upper_step_bound", scheme.upper_step_bound},
                            {"solver", to_string(scheme.solver.kind)},
                            {"samples", num_samples},
                            {"seed", seed},
                            {"T", T},
                            {"reference", reference.describe()},
                            {"rng", rng_algorithm_id()}};
  if (!problem_echo.is_null() && !problem_echo.empty()) {
    report.config_echo["problem"] = problem_echo;
  }
  return report;
}

void ErrorReport::write_csv(std::ostream& os, bool include_timing) const {
  os << "h,error,eoc,projections,ci,seconds\n";
  char buf[256];
  for (const ErrorRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.6e,", row.h, row.rms_error);
    os << buf;
    if (row.eoc) {
      std::snprintf(buf, sizeof(buf), "%.2f", *row.eoc);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%ld,%.3e,", row.projection_count,
                  row.ci_half_width);
    os << buf;
    std::snprintf(buf, sizeof(buf), "%.3f", include_timing ? row.wall_time_s : 0.0);
    os << buf << "\n";
  }
}

json ErrorReport::to_json() const {
  json rows_json = json::array();
  for (const ErrorRow& row : rows) {
    json r{{"h", row.h},
           {"error", row.rms_error},
           {"ci", row.ci_half_width},
           {"projections", row.projection_count},
           {"excluded", row.excluded},
           {"seconds", row.wall_time_s}};
    if (row.eoc) r["eoc"] = *row.eoc;
    rows_json.push_back(std::move(r));
  }
  return json{{"rows", std::move(rows_json)}, {"config", config_echo}, {"valid", valid}};
}

ProbeResult local_error_probe(const SodeProblem& problem, const SchemeSpec& scheme,
                              const Vector& x0, double t,
                              const std::vector<double>& deltas, long num_samples,
                              std::uint64_t seed, double fine_dt, int workers) {
  if (deltas.size() < 2) {
    throw std::invalid_argument("local_error_probe: need at least two deltas");
  }
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] < deltas[i - 1])) {
      throw std::invalid_argument("local_error_probe: deltas must be decreasing");
    }
  }
  scheme.validate(problem);
  if (deltas.front() > scheme.upper_step_bound * (1.0 + 1e-12)) {
    throw std::invalid_argument("local_error_probe: delta exceeds the scheme's bound");
  }
  const double window = deltas.front();
  const std::size_t n_d = deltas.size();
  std::vector<std::int64_t> fine_index(n_d);
  for (std::size_t k = 0; k < n_d; ++k) {
    const double ratio = deltas[k] / fine_dt;
    fine_index[k] = std::llround(ratio);
    if (fine_index[k] < 1 || std::abs(ratio - static_cast<double>(fine_index[k])) > 1e-9) {
      throw std::invalid_argument("local_error_probe: fine_dt must divide every delta");
    }
  }
  const StepGrid fine_grid = StepGrid::uniform(window, fine_dt);
  const SchemeSpec ref_scheme =
      SchemeSpec::for_problem(SchemeKind::ProjectedMilstein, problem);

  const int d = problem.dim;
  // D_j per delta, flattened into per-sample slots.
  std::vector<Matrix> dev(n_d, Matrix::Zero(num_samples, d));
  parallel_samples(num_samples, workers, [&](std::int64_t j, int) {
    thread_local BrownianPath path;
    generate_path_into(seed, static_cast<std::uint64_t>(j), window, fine_dt,
                       problem.num_drivers, path);
    const TrajectoryRecord ref = integrate(problem, ref_scheme, fine_grid, path, &x0, t);
    for (std::size_t k = 0; k < n_d; ++k) {
      const StepIncrements inc =
          iterated_integrals(path, 0, fine_index[k], problem.noise_structure);
      const Vector one_step = step(problem, scheme, x0, t, inc);
      dev[k].row(j) = ref.states.row(fine_index[k]) - one_step.transpose();
    }
  });

  ProbeResult result;
  result.deltas = deltas;
  result.mean_part.resize(n_d);
  result.fluct_part.resize(n_d);
  double se_at_max = 0.0;
  for (std::size_t k = 0; k < n_d; ++k) {
    const Vector mean = dev[k].colwise().sum().transpose() / static_cast<double>(num_samples);
    double fluct2 = 0.0;
    for (long j = 0; j < num_samples; ++j) {
      fluct2 += (dev[k].row(j).transpose() - mean).squaredNorm();
    }
    fluct2 /= static_cast<double>(num_samples);
    result.mean_part[k] = mean.norm();
    result.fluct_part[k] = std::sqrt(fluct2);
    if (k == 0) se_at_max = std::sqrt(fluct2 / static_cast<double>(num_samples));
  }
  if (result.mean_part[0] < 3.0 * se_at_max) result.inconclusive = true;

  std::vector<double> log_d(n_d), log_mean(n_d), log_fluct(n_d);
  for (std::size_t k = 0; k < n_d; ++k) {
    log_d[k] = std::log(deltas[k]);
    log_mean[k] = std::log(std::max(result.mean_part[k], 1e-300));
    log_fluct[k] = std::log(std::max(result.fluct_part[k], 1e-300));
  }
  result.mean_slope = ls_slope(log_d, log_mean);
  result.fluct_slope = ls_slope(log_d, log_fluct);
  return result;
}

ProjectionRate projection_rate(const SodeProblem& problem, const SchemeSpec& scheme,
                               double h, long num_samples, std::uint64_t seed,
                               int workers) {
  if (!is_projected(scheme.kind)) {
    throw std::invalid_argument("projection_rate: scheme is not projected");
  }
  scheme.validate(problem);
  const StepGrid grid = StepGrid::uniform(problem.horizon_T, h);
  std::vector<std::uint8_t> hit(num_samples, 0);
  parallel_samples(num_samples, workers, [&](std::int64_t j, int) {
    thread_local BrownianPath path;
    generate_path_into(seed, static_cast<std::uint64_t>(j), problem.horizon_T, h,
                       problem.num_drivers, path);
    Vector x0;
    const Vector* x0_ptr = nullptr;
    if (problem.initial_sampler) {
      x0 = problem.initial_sampler(seed, static_cast<std::uint64_t>(j));
      x0_ptr = &x0;
    }
    const TrajectoryRecord rec = integrate(problem, scheme, grid, path, x0_ptr);
    hit[j] = rec.projection_events > 0 ? 1 : 0;
  });
  ProjectionRate rate;
  for (long j = 0; j < num_samples; ++j) rate.count += hit[j];
  rate.fraction = static_cast<double>(rate.count) / static_cast<double>(num_samples);
  return rate;
}

std::vector<TimingRow> timing_sweep(const SodeProblem& problem,
                                    const std::vector<SchemeSpec>& schemes,
                                    const std::vector<double>& h_list, long num_samples,
                                    std::uint64_t seed, const ReferenceSpec& reference,
                                    double T, int workers) {
  std::vector<TimingRow> rows;
  for (const SchemeSpec& scheme : schemes) {
    const ErrorReport report = strong_error(problem, scheme, h_list, num_samples, seed,
                                            reference, T, workers);
    for (const ErrorRow& row : report.rows) {
      rows.push_back(TimingRow{scheme.kind, row.h, row.rms_error, row.wall_time_s});
    }
  }
  return rows;
}

}  // namespace sodeint
