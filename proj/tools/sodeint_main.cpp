#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "sodeint/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"strong-order-1 SODE integration experiments"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("presets", "list the shipped experiment presets");

  auto* run_cmd = app.add_subcommand("run", "run an experiment preset or config");
  std::string preset_name, config_path, out_dir = ".";
  long samples = -1;
  long long seed = -1;
  int workers = 1;
  bool dry_run = false;
  auto* preset_opt = run_cmd->add_option("--preset", preset_name, "preset name");
  auto* config_opt = run_cmd->add_option("--config", config_path, "config JSON path");
  preset_opt->excludes(config_opt);
  run_cmd->add_option("--samples", samples, "Monte Carlo sample count override");
  run_cmd->add_option("--seed", seed, "RNG seed override");
  run_cmd->add_option("--workers", workers, "worker thread count (never affects results)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_flag("--dry-run", dry_run, "print the resolved plan without computing");

  CLI11_PARSE(app, argc, argv);

  if (list_cmd->parsed()) {
    for (const auto& name : sodeint::preset_names()) std::cout << name << "\n";
    return 0;
  }

  try {
    sodeint::ExperimentConfig config;
    if (!preset_name.empty()) {
      config = sodeint::preset(preset_name);
    } else if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 1;
      }
      nlohmann::json j;
      in >> j;
      config = sodeint::config_from_json(
          j, std::filesystem::path(config_path).stem().string());
    } else {
      std::cerr << "error: one of --preset or --config is required\n";
      return 1;
    }
    if (samples >= 0) config.samples = samples;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    config.out_dir = out_dir;
    return sodeint::run_experiment(config, workers, dry_run, std::cout);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
