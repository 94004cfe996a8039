#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "pevo/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pevo: pseudo-spectral laboratory for p-evolution equations"};
  app.require_subcommand(0, 1);

  std::string config_path, out_dir = ".";
  int jobs = 1;
  std::uint64_t seed = 0;
  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "list scenario presets and exit");

  std::vector<std::string> stages = {"check", "tune", "solve-linear", "solve", "audit", "pipeline"};
  std::vector<CLI::App*> subs;
  for (const auto& st : stages) {
    CLI::App* sub = app.add_subcommand(st);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "parallel scenario runs");
    sub->add_option("--seed", seed, "override rng_seed");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  if (list_presets) {
    for (const auto& name : pevo::preset_names()) std::cout << name << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 0;
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  nlohmann::json config;
  {
    std::ifstream f(config_path);
    if (!f.good()) {
      std::cerr << "cannot open config: " << config_path << "\n";
      return pevo::kConfigError;
    }
    try {
      f >> config;
    } catch (const std::exception& e) {
      std::cerr << "config parse error: " << e.what() << "\n";
      return pevo::kConfigError;
    }
  }

  try {
    return pevo::run_many(config, out_dir, stage, jobs, seed);
  } catch (const pevo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return pevo::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
