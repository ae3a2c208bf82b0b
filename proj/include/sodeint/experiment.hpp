#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sodeint/analysis.hpp"

namespace sodeint {

/// A fully described experiment: problem descriptor, scheme list, step
/// sizes, sample count, seed, reference, and mode.  Step sizes are dyadic
/// and configured as base-2 exponents.
struct ExperimentConfig {
  std::string name = "experiment";
  nlohmann::json problem;

  struct SchemeEntry {
    SchemeKind kind = SchemeKind::ProjectedMilstein;
    std::optional<double> alpha;                    // default 1/(2(q-1))
    std::optional<ImplicitSolverKind> solver;       // default newton
    int fixed_iters = 3;
  };
  std::vector<SchemeEntry> schemes;

  std::vector<double> h_list;  // decreasing
  long samples = 20000;
  std::uint64_t seed = 1;

  bool reference_exact = false;
  SchemeKind reference_scheme = SchemeKind::ProjectedMilstein;
  double reference_fine_dt = 0x1.0p-12;

  std::string mode = "convergence";  // convergence | timing | probes | conditions

  std::vector<double> probe_deltas;      // probes mode
  double probe_fine_dt = 0x1.0p-16;      // probes mode
  double conditions_radius = 10.0;       // conditions mode
  long conditions_samples = 100000;      // conditions mode
  double coercivity_p = 14.0;            // conditions mode

  std::string out_dir = ".";
};

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

/// Parses and validates a config; error messages name the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& name);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Checks the config invariants against the resolved problem and schemes
/// (decreasing h, reference resolution dividing every h, step bounds).
void validate_config(const ExperimentConfig& config);

/// Runs the experiment, writing <name>_<scheme>.csv (or probe/conditions
/// outputs) plus <name>_meta.json under config.out_dir.  With dry_run only
/// the resolved plan is printed.  Returns a process exit code.
int run_experiment(const ExperimentConfig& config, int workers, bool dry_run,
                   std::ostream& log);

}  // namespace sodeint
