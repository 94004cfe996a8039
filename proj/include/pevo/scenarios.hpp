#pragma once

#include <json.hpp>

#include "pevo/io.hpp"

namespace pevo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pipeline stage failures map to distinct exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kCheckFailed = 3,
  kTuneFailed = 4,
  kSolverUnstable = 5,
  kAuditFailed = 6,
  kNewtonFailed = 7,
};

std::vector<std::string> preset_names();

/// Scenario built from a named preset: the semilinear problem plus the
/// cutoff pair and scenario bookkeeping.
struct Scenario {
  std::string preset;
  std::shared_ptr<const Grid> grid;
  SemilinearProblem problem;
  CutoffPair cutoffs;
  bool w_dependent = false;  // any coefficient depends on w
};

Scenario build_scenario(const std::string& preset, const nlohmann::json& params,
                        std::shared_ptr<const Grid> grid);

/// The KdV family mapped onto the p=3 operator: a_3 = c sigma/3 with
/// c = (3/2) sqrt(g/h) and sigma = h^3/3 - T h/(rho g); the quadratic
/// nonlinearity becomes a_1(w) = -c (w + 2 alpha / 3). A variable depth
/// h(x) makes a_3 = a_3(x) and adds a_2(x) = -i c sigma'/3.
SemilinearProblem preset_kdv(const nlohmann::json& params, std::shared_ptr<const Grid> grid);
SemilinearProblem preset_schrodinger(const nlohmann::json& params, std::shared_ptr<const Grid> grid);

/// Validate a run configuration and echo every default explicitly.
nlohmann::ordered_json resolve_config(const nlohmann::json& config);

/// check -> tune -> solve -> audit, artifacts under out_dir. `stage` limits
/// execution (check | tune | solve-linear | solve | audit | pipeline).
int run_pipeline(const nlohmann::json& config, const std::string& out_dir,
                 const std::string& stage = "pipeline", std::uint64_t seed_override = 0,
                 bool quiet = false);

/// Fan out over config["runs"] with up to `jobs` worker threads.
int run_many(const nlohmann::json& config, const std::string& out_dir, const std::string& stage,
             int jobs, std::uint64_t seed_override = 0);

VecC build_initial_datum(const Grid& g, const nlohmann::json& spec);

}  // namespace pevo
