#include "sodeint/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace sodeint {

using nlohmann::json;

namespace {

std::vector<double> dyadic_steps(int from_log2, int to_log2) {
  std::vector<double> h;
  for (int k = from_log2; k >= to_log2; --k) h.push_back(std::exp2(k));
  return h;
}

ExperimentConfig base_double_well_preset(const std::string& name, double sigma) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.problem = json{{"family", "double_well"}, {"sigma", sigma}, {"x0", 2.0}, {"T", 1.0}};
  cfg.schemes = {
      {SchemeKind::ProjectedEM, std::nullopt, std::nullopt, 3},
      {SchemeKind::ProjectedMilstein, std::nullopt, std::nullopt, 3},
      {SchemeKind::SplitStepBackwardMilstein, std::nullopt,
       ImplicitSolverKind::CardanoScalarCubic, 3},
  };
  cfg.h_list = dyadic_steps(-4, -10);
  cfg.samples = 20000;
  cfg.seed = 1;
  cfg.reference_exact = false;
  cfg.reference_scheme = SchemeKind::ProjectedMilstein;
  cfg.reference_fine_dt = 0x1.0p-12;
  cfg.mode = "convergence";
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"table2", "table3", "table4", "fig_timing", "probes"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "table2") return base_double_well_preset("table2", 0.3);
  if (name == "table3") return base_double_well_preset("table3", 1.0);
  if (name == "fig_timing") {
    ExperimentConfig cfg = base_double_well_preset("fig_timing", 0.3);
    cfg.mode = "timing";
    return cfg;
  }
  if (name == "table4") {
    ExperimentConfig cfg;
    cfg.name = "table4";
    cfg.problem = json{{"family", "oscillator"}, {"mu", 0.4},   {"theta", 1.0},
                       {"sigma1", 0.5},          {"sigma2", 0.6}, {"r0", 1.97},
                       {"phi0", 0.7853981633974483}, {"T", 1.0}};
    cfg.schemes = {
        {SchemeKind::ProjectedEM, std::nullopt, std::nullopt, 3},
        {SchemeKind::ProjectedMilstein, std::nullopt, std::nullopt, 3},
        {SchemeKind::SplitStepBackwardMilstein, std::nullopt,
         ImplicitSolverKind::NewtonFixedIters, 3},
    };
    cfg.h_list = dyadic_steps(-4, -10);
    cfg.samples = 20000;
    cfg.seed = 1;
    cfg.reference_exact = true;
    cfg.reference_fine_dt = 0x1.0p-12;
    cfg.mode = "convergence";
    return cfg;
  }
  if (name == "probes") {
    ExperimentConfig cfg;
    cfg.name = "probes";
    cfg.problem = json{{"family", "double_well"}, {"sigma", 0.3}, {"x0", 1.5}, {"T", 1.0}};
    cfg.schemes = {
        {SchemeKind::ProjectedMilstein, std::nullopt, std::nullopt, 3},
        {SchemeKind::SplitStepBackwardMilstein, std::nullopt,
         ImplicitSolverKind::CardanoScalarCubic, 3},
    };
    cfg.h_list = dyadic_steps(-4, -9);
    cfg.probe_deltas = dyadic_steps(-4, -9);
    cfg.probe_fine_dt = 0x1.0p-16;
    cfg.samples = 100000;
    cfg.seed = 1;
    cfg.mode = "probes";
    return cfg;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

namespace {

SchemeSpec resolve_scheme(const ExperimentConfig::SchemeEntry& entry,
                          const SodeProblem& problem) {
  SchemeSpec spec = SchemeSpec::for_problem(entry.kind, problem);
  if (entry.alpha) spec.alpha = *entry.alpha;
  if (entry.solver) {
    spec.solver.kind = *entry.solver;
    spec.solver.fixed_iters = entry.fixed_iters;
  }
  return spec;
}

double number_field(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw std::invalid_argument("config." + key + " must be a number");
  }
  return j.at(key).get<double>();
}

std::vector<double> steps_from_log2(const json& j, const std::string& key) {
  if (!j.at(key).is_array() || j.at(key).empty()) {
    throw std::invalid_argument("config." + key + " must be a non-empty array");
  }
  std::vector<double> out;
  for (const auto& e : j.at(key)) {
    if (!e.is_number_integer()) {
      throw std::invalid_argument("config." + key + " entries must be integers "
                                  "(base-2 exponents)");
    }
    out.push_back(std::exp2(e.get<double>()));
  }
  return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::string& name) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.name = name;
  if (!j.contains("problem")) throw std::invalid_argument("config.problem is required");
  cfg.problem = j.at("problem");
  if (!j.contains("schemes") || !j.at("schemes").is_array() || j.at("schemes").empty()) {
    throw std::invalid_argument("config.schemes must be a non-empty array");
  }
  for (const auto& sj : j.at("schemes")) {
    ExperimentConfig::SchemeEntry entry;
    if (sj.is_string()) {
      entry.kind = scheme_from_string(sj.get<std::string>());
    } else if (sj.is_object()) {
      if (!sj.contains("kind") || !sj.at("kind").is_string()) {
        throw std::invalid_argument("config.schemes[].kind is required");
      }
      entry.kind = scheme_from_string(sj.at("kind").get<std::string>());
      if (sj.contains("alpha")) entry.alpha = sj.at("alpha").get<double>();
      if (sj.contains("solver")) {
        entry.solver = implicit_solver_from_string(sj.at("solver").get<std::string>());
      }
      if (sj.contains("fixed_iters")) entry.fixed_iters = sj.at("fixed_iters").get<int>();
    } else {
      throw std::invalid_argument("config.schemes[] must be strings or objects");
    }
    cfg.schemes.push_back(entry);
  }
  if (j.contains("h_log2")) cfg.h_list = steps_from_log2(j, "h_log2");
  if (j.contains("samples")) {
    if (!j.at("samples").is_number_integer()) {
      throw std::invalid_argument("config.samples must be an integer");
    }
    cfg.samples = j.at("samples").get<long>();
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mode")) cfg.mode = j.at("mode").get<std::string>();
  if (j.contains("reference")) {
    const json& r = j.at("reference");
    if (!r.is_object() || !r.contains("kind")) {
      throw std::invalid_argument("config.reference must be an object with a kind");
    }
    const std::string kind = r.at("kind").get<std::string>();
    if (kind == "exact") {
      cfg.reference_exact = true;
    } else if (kind == "scheme") {
      cfg.reference_exact = false;
      if (r.contains("scheme")) {
        cfg.reference_scheme = scheme_from_string(r.at("scheme").get<std::string>());
      }
    } else {
      throw std::invalid_argument("config.reference.kind must be 'exact' or 'scheme'");
    }
    if (r.contains("fine_dt_log2")) {
      cfg.reference_fine_dt = std::exp2(r.at("fine_dt_log2").get<double>());
    }
  }
  if (j.contains("probe")) {
    const json& p = j.at("probe");
    if (p.contains("delta_log2")) cfg.probe_deltas = steps_from_log2(p, "delta_log2");
    cfg.probe_fine_dt = std::exp2(number_field(p, "fine_dt_log2", -16.0));
  }
  if (j.contains("conditions")) {
    const json& c = j.at("conditions");
    cfg.conditions_radius = number_field(c, "radius", cfg.conditions_radius);
    if (c.contains("samples")) cfg.conditions_samples = c.at("samples").get<long>();
    cfg.coercivity_p = number_field(c, "coercivity_p", cfg.coercivity_p);
  }
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json schemes = json::array();
  for (const auto& entry : cfg.schemes) {
    json sj{{"kind", to_string(entry.kind)}};
    if (entry.alpha) sj["alpha"] = *entry.alpha;
    if (entry.solver) {
      sj["solver"] = to_string(*entry.solver);
      if (*entry.solver == ImplicitSolverKind::NewtonFixedIters) {
        sj["fixed_iters"] = entry.fixed_iters;
      }
    }
    schemes.push_back(std::move(sj));
  }
  json reference{{"kind", cfg.reference_exact ? "exact" : "scheme"},
                 {"fine_dt_log2",
                  static_cast<int>(std::lround(std::log2(cfg.reference_fine_dt)))}};
  if (!cfg.reference_exact) reference["scheme"] = to_string(cfg.reference_scheme);
  json out{{"problem", cfg.problem}, {"schemes", std::move(schemes)},
           {"samples", cfg.samples}, {"seed", cfg.seed},
           {"reference", std::move(reference)}, {"mode", cfg.mode}};
  if (!cfg.h_list.empty()) {
    json h_log2 = json::array();
    for (double h : cfg.h_list) {
      h_log2.push_back(static_cast<int>(std::lround(std::log2(h))));
    }
    out["h_log2"] = std::move(h_log2);
  }
  if (cfg.mode == "probes") {
    json deltas = json::array();
    for (double d : cfg.probe_deltas) {
      deltas.push_back(static_cast<int>(std::lround(std::log2(d))));
    }
    out["probe"] = json{{"delta_log2", std::move(deltas)},
                        {"fine_dt_log2",
                         static_cast<int>(std::lround(std::log2(cfg.probe_fine_dt)))}};
  }
  if (cfg.mode == "conditions") {
    out["conditions"] = json{{"radius", cfg.conditions_radius},
                             {"samples", cfg.conditions_samples},
                             {"coercivity_p", cfg.coercivity_p}};
  }
  return out;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.samples < 2) {
    throw std::invalid_argument("config.samples must be at least 2");
  }
  if (cfg.mode != "convergence" && cfg.mode != "timing" && cfg.mode != "probes" &&
      cfg.mode != "conditions") {
    throw std::invalid_argument("config.mode must be one of convergence, timing, "
                                "probes, conditions");
  }
  const ParametricProblem problem = problem_from_json(cfg.problem);
  if (cfg.schemes.empty()) {
    throw std::invalid_argument("config.schemes must not be empty");
  }
  if (cfg.mode == "convergence" || cfg.mode == "timing") {
    if (cfg.h_list.empty()) {
      throw std::invalid_argument("config.h_log2 must not be empty");
    }
    for (std::size_t i = 1; i < cfg.h_list.size(); ++i) {
      if (!(cfg.h_list[i] < cfg.h_list[i - 1])) {
        throw std::invalid_argument("config.h_log2 must be strictly decreasing");
      }
    }
    for (double h : cfg.h_list) {
      const double ratio = h / cfg.reference_fine_dt;
      if (ratio < 1.0 || std::abs(ratio - std::llround(ratio)) > 1e-9) {
        throw std::invalid_argument(
            "config.reference.fine_dt_log2 must divide every entry of h_log2");
      }
      const double T = problem.sode.horizon_T;
      const double steps = T / h;
      if (std::abs(steps - std::llround(steps)) > 1e-9) {
        throw std::invalid_argument("config.h_log2: steps must divide problem.T");
      }
    }
    if (cfg.reference_exact && !problem.has_exact_solution()) {
      throw std::invalid_argument("config.reference: family " +
                                  to_string(problem.family) +
                                  " has no exact solution; use a scheme reference");
    }
    for (const auto& entry : cfg.schemes) {
      const SchemeSpec spec = resolve_scheme(entry, problem.sode);
      spec.validate(problem.sode);
      if (cfg.h_list.front() > spec.upper_step_bound * (1.0 + 1e-12)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "config.h_log2: scheme %s requires step sizes at most %.6g",
                      to_string(entry.kind).c_str(), spec.upper_step_bound);
        throw std::invalid_argument(buf);
      }
    }
  }
  if (cfg.mode == "probes") {
    if (cfg.probe_deltas.size() < 2) {
      throw std::invalid_argument("config.probe.delta_log2 needs at least two entries");
    }
    for (std::size_t i = 1; i < cfg.probe_deltas.size(); ++i) {
      if (!(cfg.probe_deltas[i] < cfg.probe_deltas[i - 1])) {
        throw std::invalid_argument("config.probe.delta_log2 must be strictly decreasing");
      }
    }
  }
  if (cfg.mode == "conditions") {
    if (!(cfg.conditions_radius > 0.0)) {
      throw std::invalid_argument("config.conditions.radius must be positive");
    }
    if (cfg.conditions_samples < 1) {
      throw std::invalid_argument("config.conditions.samples must be positive");
    }
    if (!(cfg.coercivity_p >= 2.0)) {
      throw std::invalid_argument("config.conditions.coercivity_p must be >= 2");
    }
  }
}

namespace {

void print_plan(const ExperimentConfig& cfg, const ParametricProblem& problem,
                const std::vector<SchemeSpec>& schemes, std::ostream& log) {
  log << "experiment " << cfg.name << " (mode " << cfg.mode << ")\n";
  log << "  problem: " << cfg.problem.dump() << "\n";
  log << "  samples: " << cfg.samples << ", seed: " << cfg.seed << "\n";
  if (cfg.mode == "convergence" || cfg.mode == "timing") {
    log << "  reference: "
        << (cfg.reference_exact
                ? ReferenceSpec::exact_solution(problem, cfg.reference_fine_dt).describe()
                : ReferenceSpec::fine_scheme(cfg.reference_scheme, cfg.reference_fine_dt)
                      .describe())
        << "\n";
    log << "  grids:";
    for (double h : cfg.h_list) {
      log << " " << h << " (" << std::llround(problem.sode.horizon_T / h) << " steps)";
    }
    log << "\n";
  }
  if (cfg.mode == "probes") {
    log << "  probe deltas:";
    for (double d : cfg.probe_deltas) log << " " << d;
    log << "  fine_dt " << cfg.probe_fine_dt << "\n";
  }
  for (const SchemeSpec& s : schemes) {
    log << "  scheme " << to_string(s.kind) << ": upper_step_bound "
        << s.upper_step_bound;
    if (is_projected(s.kind)) log << ", alpha " << s.alpha;
    if (is_split_step(s.kind)) log << ", solver " << to_string(s.solver.kind);
    log << "\n";
  }
}

json condition_to_json(const ConditionReport& report) {
  return json{{"condition", to_string(report.condition_id)},
              {"worst_ratio", report.worst_ratio},
              {"num_samples", report.num_samples},
              {"region_radius", report.sample_region_radius},
              {"passed", report.passed},
              {"verdict", report.verdict()}};
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, int workers, bool dry_run,
                   std::ostream& log) {
  validate_config(cfg);
  const ParametricProblem problem = problem_from_json(cfg.problem);
  std::vector<SchemeSpec> schemes;
  for (const auto& entry : cfg.schemes) schemes.push_back(resolve_scheme(entry, problem.sode));

  if (dry_run) {
    print_plan(cfg, problem, schemes, log);
    return 0;
  }
  std::filesystem::create_directories(cfg.out_dir);
  const auto out_path = [&](const std::string& suffix) {
    return (std::filesystem::path(cfg.out_dir) / (cfg.name + "_" + suffix)).string();
  };

  json meta{{"config", config_to_json(cfg)},
            {"rng", rng_algorithm_id()},
            {"library_version", kLibraryVersion},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                  std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
            {"workers", workers}};
  json results = json::object();

  if (cfg.mode == "convergence" || cfg.mode == "timing") {
    const ReferenceSpec reference =
        cfg.reference_exact
            ? ReferenceSpec::exact_solution(problem, cfg.reference_fine_dt)
            : ReferenceSpec::fine_scheme(cfg.reference_scheme, cfg.reference_fine_dt);
    for (std::size_t i = 0; i < schemes.size(); ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const ErrorReport report =
          strong_error(problem.sode, schemes[i], cfg.h_list, cfg.samples, cfg.seed,
                       reference, problem.sode.horizon_T, workers, problem.params);
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::string scheme_name = to_string(schemes[i].kind);
      std::ofstream csv(out_path(scheme_name + ".csv"));
      report.write_csv(csv, cfg.mode == "timing");
      results[scheme_name] = report.to_json();
      results[scheme_name]["elapsed_seconds"] = elapsed;
      if (!report.valid) {
        log << "warning: scheme " << scheme_name
            << " excluded more than 0.1% of samples; report flagged invalid\n";
      }
      log << "scheme " << scheme_name << " done in " << elapsed << " s\n";
    }
  } else if (cfg.mode == "probes") {
    for (const SchemeSpec& scheme : schemes) {
      const ProbeResult probe = local_error_probe(
          problem.sode, scheme, problem.sode.initial_value, 0.0, cfg.probe_deltas,
          cfg.samples, cfg.seed, cfg.probe_fine_dt, workers);
      const std::string scheme_name = to_string(scheme.kind);
      std::ofstream csv(out_path("probe_" + scheme_name + ".csv"));
      csv << "delta,mean_part,fluct_part\n";
      char buf[160];
      for (std::size_t k = 0; k < probe.deltas.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.6e,%.6e\n", probe.deltas[k],
                      probe.mean_part[k], probe.fluct_part[k]);
        csv << buf;
      }
      results[scheme_name] = json{{"mean_slope", probe.mean_slope},
                                  {"fluct_slope", probe.fluct_slope},
                                  {"inconclusive", probe.inconclusive}};
      log << "probe " << scheme_name << ": mean_slope " << probe.mean_slope
          << ", fluct_slope " << probe.fluct_slope << "\n";
    }
  } else {  // conditions
    const SodeProblem& s = problem.sode;
    json reports = json::array();
    reports.push_back(condition_to_json(verify_monotonicity(
        s, s.eta, cfg.conditions_radius, cfg.conditions_samples, cfg.seed, workers)));
    reports.push_back(condition_to_json(verify_ssbm_monotonicity(
        s, s.eta1.value_or(1.5), s.eta2.value_or(0.5), cfg.conditions_radius,
        cfg.conditions_samples, cfg.seed, workers)));
    reports.push_back(condition_to_json(verify_coercivity(
        s, cfg.coercivity_p, cfg.conditions_radius, cfg.conditions_samples, cfg.seed,
        workers)));
    std::ofstream out(out_path("conditions.json"));
    out << json{{"problem", problem.params}, {"reports", reports}}.dump(2) << "\n";
    results["conditions"] = reports;
    for (const auto& r : reports) {
      log << r.at("condition").get<std::string>() << ": "
          << r.at("verdict").get<std::string>() << " (worst ratio "
          << r.at("worst_ratio").get<double>() << ")\n";
    }
  }

  meta["results"] = std::move(results);
  std::ofstream meta_out(out_path("meta.json"));
  meta_out << meta.dump(2) << "\n";
  return 0;
}

}  // namespace sodeint
