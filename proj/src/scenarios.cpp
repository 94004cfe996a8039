#include "pevo/scenarios.hpp"

#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

namespace pevo {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double jget(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j.at(key).get<double>();
}

void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
  }
}

std::function<double(cxd)> gamma_quadratic() {
  return [](cxd w) { return 1.0 + std::norm(w); };
}

}  // namespace

VecC build_initial_datum(const Grid& g, const json& spec) {
  std::string type = spec.value("type", "gaussian");
  VecC u0 = VecC::Zero(g.size());
  if (type == "zero") return u0;
  double amp = jget(spec, "amplitude", 1.0);
  double width = jget(spec, "width", 1.0);
  double center = jget(spec, "center", 0.0);
  double mod = jget(spec, "modulation_freq", 0.0);
  if (type == "gaussian") {
    for (int j = 0; j < g.size(); ++j) {
      double x = g.node(j);
      u0[j] = amp * std::exp(-std::pow((x - center) / width, 2)) * std::exp(cxd(0.0, mod * x));
    }
  } else if (type == "sech") {
    for (int j = 0; j < g.size(); ++j) {
      double x = g.node(j);
      u0[j] = amp / std::cosh((x - center) / width) * std::exp(cxd(0.0, mod * x));
    }
  } else if (type == "mode") {
    int k = spec.value("k", 1);
    double xi = M_PI * k / g.half_length();
    for (int j = 0; j < g.size(); ++j) u0[j] = amp * std::exp(cxd(0.0, xi * g.node(j)));
  } else {
    throw ConfigError("config: unknown initial datum type '" + type + "'");
  }
  if (spec.contains("norm_s")) {
    const json& ns = spec.at("norm_s");
    double s = jget(ns, "s", 4.0), value = jget(ns, "value", 0.1);
    double cur = g.sobolev_norm(u0, s, 1.0);
    require(cur > 0.0, "build_initial_datum: cannot normalize the zero field");
    u0 *= value / cur;
  }
  return u0;
}

std::vector<std::string> preset_names() {
  return {"kdv",          "kdv_variable_depth", "airy",        "schrodinger",
          "schrodinger_free", "p3_im_decay",    "p3_im_const"};
}

SemilinearProblem preset_kdv(const json& params, std::shared_ptr<const Grid> grid) {
  double gravity = jget(params, "gravity", 9.8);
  double depth = jget(params, "depth", 1.0);
  double alpha = jget(params, "alpha", 0.05);
  double tension = jget(params, "surface_tension", 0.0);
  double rho = jget(params, "rho", 1000.0);
  double bump = jget(params, "depth_bump", 0.0);
  double bump_width = jget(params, "bump_width", 10.0);
  bool nonlinear = params.value("nonlinear", true);
  require(gravity > 0 && depth > 0 && rho > 0, "preset_kdv: g, h, rho must be positive");

  auto hx = [=](double x) { return depth * (1.0 + bump * (1.0 / std::cosh(x / bump_width))); };
  auto cx = [=](double x) { return 1.5 * std::sqrt(gravity / hx(x)); };
  auto sigx = [=](double x) {
    double hh = hx(x);
    return hh * hh * hh / 3.0 - tension * hh / (rho * gravity);
  };
  auto dsigx = [=](double x) {  // sigma'(x) = (h^2 - T/(rho g)) h'(x)
    double hh = hx(x);
    double sh = 1.0 / std::cosh(x / bump_width), th = std::tanh(x / bump_width);
    double dh = -depth * bump * sh * th / bump_width;
    return (hh * hh - tension / (rho * gravity)) * dh;
  };
  bool xdep = bump != 0.0;

  SemilinearProblem prob;
  prob.grid = grid;
  prob.coeffs.p = 3;
  prob.coeffs.ap_x_dependent = xdep;
  prob.coeffs.a_p = [=](double, double x) { return cx(x) * sigx(x) / 3.0; };
  prob.coeffs.a.resize(3);
  prob.coeffs.dw.resize(3);
  prob.coeffs.a[2] = [=](double, double x, cxd) -> cxd {
    if (!xdep) return 0.0;
    return cxd(0.0, -1.0) * cx(x) * dsigx(x) / 3.0;
  };
  prob.coeffs.dw[2] = [](double, double, cxd) -> cxd { return 0.0; };
  if (nonlinear) {
    prob.coeffs.a[1] = [=](double, double x, cxd w) -> cxd { return -cx(x) * (w + 2.0 * alpha / 3.0); };
    prob.coeffs.dw[1] = [=](double, double x, cxd) -> cxd { return -cx(x); };
  } else {
    prob.coeffs.a[1] = [=](double, double x, cxd) -> cxd { return -cx(x) * (2.0 * alpha / 3.0); };
    prob.coeffs.dw[1] = [](double, double, cxd) -> cxd { return 0.0; };
  }
  prob.coeffs.a[0] = [](double, double, cxd) -> cxd { return 0.0; };
  prob.coeffs.dw[0] = [](double, double, cxd) -> cxd { return 0.0; };
  prob.coeffs.gamma = gamma_quadratic();
  // principal ellipticity constant: grid minimum of a_3
  double cp = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid->size(); ++j) cp = std::min(cp, prob.coeffs.a_p(0.0, grid->node(j)));
  if (!(cp > 0.0))
    throw ConfigError("preset_kdv: depth profile violates a_p >= C_p > 0 (check surface tension)");
  prob.coeffs.C_p = cp;
  prob.coeffs.C = jget(params, "condition_C", 1.0);
  prob.u0 = build_initial_datum(*grid, params.value("u0", json{{"type", "gaussian"},
                                                               {"width", 2.0},
                                                               {"norm_s", {{"s", 4.0}, {"value", 0.1}}}}));
  return prob;
}

SemilinearProblem preset_schrodinger(const json& params, std::shared_ptr<const Grid> grid) {
  double a2 = jget(params, "a2", 1.0);
  double im_a1 = jget(params, "im_a1_scale", 0.0);
  double im_a1_decay = jget(params, "im_a1_decay", 1.0);
  double re_a1 = jget(params, "re_a1_scale", 0.0);
  double a0 = jget(params, "a0_scale", 0.0);
  double nl = jget(params, "nonlinear_scale", 0.0);
  require(a2 > 0, "preset_schrodinger: a2 must be positive");

  SemilinearProblem prob;
  prob.grid = grid;
  prob.coeffs.p = 2;
  prob.coeffs.a_p = [=](double, double) { return a2; };
  prob.coeffs.a.resize(2);
  prob.coeffs.dw.resize(2);
  prob.coeffs.a[1] = [=](double, double x, cxd w) -> cxd {
    return re_a1 + nl * w + cxd(0.0, im_a1) / std::pow(xbracket(x), im_a1_decay);
  };
  prob.coeffs.dw[1] = [=](double, double, cxd) -> cxd { return nl; };
  prob.coeffs.a[0] = [=](double, double x, cxd) -> cxd { return cxd(0.0, a0) / xbracket(x); };
  prob.coeffs.dw[0] = [](double, double, cxd) -> cxd { return 0.0; };
  prob.coeffs.gamma = gamma_quadratic();
  prob.coeffs.C_p = a2;
  prob.coeffs.C = jget(params, "condition_C", 1.0);
  prob.u0 = build_initial_datum(*grid, params.value("u0", json{{"type", "gaussian"}, {"width", 2.0}}));
  return prob;
}

namespace {

SemilinearProblem preset_p3_im(const json& params, std::shared_ptr<const Grid> grid, bool decay) {
  double a3 = jget(params, "a3", 1.0);
  double c = jget(params, "c", 1.0);
  SemilinearProblem prob;
  prob.grid = grid;
  prob.coeffs.p = 3;
  prob.coeffs.a_p = [=](double, double) { return a3; };
  prob.coeffs.a.resize(3);
  prob.coeffs.dw.resize(3);
  prob.coeffs.a[2] = decay
                         ? CoeffFn([=](double, double x, cxd) -> cxd { return cxd(0.0, c) / xbracket(x); })
                         : CoeffFn([=](double, double, cxd) -> cxd { return cxd(0.0, c); });
  prob.coeffs.a[1] = [](double, double, cxd) -> cxd { return 0.0; };
  prob.coeffs.a[0] = [](double, double, cxd) -> cxd { return 0.0; };
  for (int j = 0; j < 3; ++j) prob.coeffs.dw[j] = [](double, double, cxd) -> cxd { return 0.0; };
  prob.coeffs.gamma = [](cxd) { return 1.0; };
  prob.coeffs.C_p = a3;
  prob.coeffs.C = jget(params, "condition_C", std::max(1.0, c));
  prob.u0 = build_initial_datum(
      *grid, params.value("u0", json{{"type", "gaussian"}, {"width", 4.0}, {"center", -15.0},
                                     {"modulation_freq", 6.0}}));
  return prob;
}

}  // namespace

Scenario build_scenario(const std::string& preset, const json& params,
                        std::shared_ptr<const Grid> grid) {
  Scenario sc;
  sc.preset = preset;
  sc.grid = grid;
  if (preset == "kdv") {
    sc.problem = preset_kdv(params, grid);
    sc.w_dependent = params.value("nonlinear", true);
  } else if (preset == "kdv_variable_depth") {
    json p2 = params;
    if (!p2.contains("depth_bump")) p2["depth_bump"] = 0.1;
    sc.problem = preset_kdv(p2, grid);
    sc.w_dependent = p2.value("nonlinear", true);
  } else if (preset == "airy") {
    json p2 = params;
    p2["nonlinear"] = false;
    p2["alpha"] = jget(params, "alpha", 0.0);
    sc.problem = preset_kdv(p2, grid);
    sc.w_dependent = false;
  } else if (preset == "schrodinger") {
    sc.problem = preset_schrodinger(params, grid);
    sc.w_dependent = jget(params, "nonlinear_scale", 0.0) != 0.0;
  } else if (preset == "schrodinger_free") {
    json p2 = params;
    p2["im_a1_scale"] = 0.0;
    p2["re_a1_scale"] = 0.0;
    p2["a0_scale"] = 0.0;
    p2["nonlinear_scale"] = 0.0;
    sc.problem = preset_schrodinger(p2, grid);
    sc.w_dependent = false;
  } else if (preset == "p3_im_decay") {
    sc.problem = preset_p3_im(params, grid, true);
  } else if (preset == "p3_im_const") {
    sc.problem = preset_p3_im(params, grid, false);
  } else {
    throw ConfigError("unknown preset '" + preset + "'; see --list-presets");
  }
  sc.cutoffs.p = sc.problem.coeffs.p;
  return sc;
}

ordered_json resolve_config(const json& config) {
  check_keys(config, {"schema_version", "scenario", "grid", "solver", "pack", "check", "audit",
                      "output", "rng_seed", "runs"},
             "top level");
  if (config.contains("runs")) {
    ordered_json out;
    out["schema_version"] = 1;
    out["runs"] = ordered_json::array();
    for (const auto& r : config.at("runs")) out["runs"].push_back(resolve_config(r));
    return out;
  }
  int sv = config.value("schema_version", 1);
  if (sv != 1) throw ConfigError("config: unsupported schema_version");

  ordered_json out;
  out["schema_version"] = 1;

  const json scenario = config.value("scenario", json::object());
  check_keys(scenario, {"preset", "params"}, "scenario");
  std::string preset = scenario.value("preset", "schrodinger_free");
  auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset) == names.end())
    throw ConfigError("config: unknown preset '" + preset + "'");
  out["scenario"]["preset"] = preset;
  out["scenario"]["params"] = scenario.value("params", json::object());

  const json grid = config.value("grid", json::object());
  check_keys(grid, {"N", "L"}, "grid");
  int N = grid.value("N", 256);
  double L = jget(grid, "L", 40.0);
  if (N <= 0 || N % 2 != 0) throw ConfigError("config: grid.N must be a positive even integer");
  if (L <= 0) throw ConfigError("config: grid.L must be positive");
  out["grid"]["N"] = N;
  out["grid"]["L"] = L;

  const json solver = config.value("solver", json::object());
  check_keys(solver,
             {"mode", "dt", "T", "s", "tol", "epsilon", "max_iterations", "seed", "target",
              "smoothing", "cadence", "cfl_scale"},
             "solver");
  std::string mode = solver.value("mode", "linear");
  if (mode != "linear" && mode != "transformed" && mode != "newton")
    throw ConfigError("config: solver.mode must be linear|transformed|newton");
  out["solver"]["mode"] = mode;
  out["solver"]["dt"] = jget(solver, "dt", 0.0);
  out["solver"]["T"] = jget(solver, "T", 0.1);
  out["solver"]["s"] = jget(solver, "s", 4.0);
  out["solver"]["tol"] = jget(solver, "tol", 1e-6);
  out["solver"]["epsilon"] = jget(solver, "epsilon", 0.0);
  out["solver"]["max_iterations"] = solver.value("max_iterations", 10);
  std::string seed = solver.value("seed", "taylor");
  if (seed != "taylor" && seed != "zero") throw ConfigError("config: solver.seed must be taylor|zero");
  out["solver"]["seed"] = seed;
  std::string target = solver.value("target", "phi_eps");
  if (target != "phi_eps" && target != "zero")
    throw ConfigError("config: solver.target must be phi_eps|zero");
  out["solver"]["target"] = target;
  out["solver"]["smoothing"] = solver.value("smoothing", false);
  out["solver"]["cadence"] = solver.value("cadence", 1);
  out["solver"]["cfl_scale"] = jget(solver, "cfl_scale", 1.0);
  if (out["solver"]["T"].get<double>() <= 0) throw ConfigError("config: solver.T must be positive");

  const json pack = config.value("pack", json::object());
  check_keys(pack,
             {"tune", "M", "h", "neumann_order", "budget_c0", "tune_margin", "M_init", "M_cap",
              "neumann_target", "dense_inverse"},
             "pack");
  out["pack"]["tune"] = pack.value("tune", true);
  out["pack"]["M"] = pack.value("M", std::vector<double>{});
  out["pack"]["h"] = jget(pack, "h", 1.0);
  out["pack"]["neumann_order"] = pack.value("neumann_order", 8);
  out["pack"]["budget_c0"] = jget(pack, "budget_c0", 1.0);
  out["pack"]["tune_margin"] = jget(pack, "tune_margin", 0.8);
  out["pack"]["M_init"] = jget(pack, "M_init", 1.0);
  out["pack"]["M_cap"] = jget(pack, "M_cap", 65536.0);
  out["pack"]["neumann_target"] = jget(pack, "neumann_target", 0.5);
  out["pack"]["dense_inverse"] = pack.value("dense_inverse", false);

  const json check = config.value("check", json::object());
  check_keys(check, {"enabled", "t_samples", "x_count", "x_max", "w_count", "w_max"}, "check");
  out["check"]["enabled"] = check.value("enabled", true);
  out["check"]["t_samples"] = check.value("t_samples", std::vector<double>{0.0});
  out["check"]["x_count"] = check.value("x_count", 41);
  out["check"]["x_max"] = jget(check, "x_max", 80.0);
  out["check"]["w_count"] = check.value("w_count", 5);
  out["check"]["w_max"] = jget(check, "w_max", 2.0);

  const json audit = config.value("audit", json::object());
  check_keys(audit, {"enabled", "fit_fraction"}, "audit");
  out["audit"]["enabled"] = audit.value("enabled", true);
  out["audit"]["fit_fraction"] = jget(audit, "fit_fraction", 0.1);

  const json output = config.value("output", json::object());
  check_keys(output, {"frames"}, "output");
  out["output"]["frames"] = output.value("frames", false);

  out["rng_seed"] = config.value("rng_seed", 1234);
  return out;
}

namespace {

struct StageWants {
  bool check = false, tune = false, solve = false, audit = false;
};

StageWants stage_plan(const std::string& stage, const std::string& mode) {
  StageWants w;
  if (stage == "check") {
    w.check = true;
  } else if (stage == "tune") {
    w.check = w.tune = true;
  } else if (stage == "solve-linear") {
    w.solve = true;
    w.tune = (mode == "transformed");
  } else if (stage == "solve") {
    w.solve = true;
  } else if (stage == "audit") {
    w.solve = w.audit = true;
    w.tune = (mode == "transformed");
  } else if (stage == "pipeline") {
    w.check = w.solve = w.audit = true;
    w.tune = (mode == "transformed");
  } else {
    throw ConfigError("unknown stage '" + stage + "'");
  }
  return w;
}

}  // namespace

int run_pipeline(const json& config_in, const std::string& out_dir, const std::string& stage,
                 std::uint64_t seed_override, bool quiet) {
  namespace fs = std::filesystem;
  ordered_json cfg;
  try {
    cfg = resolve_config(config_in);
    if (seed_override) cfg["rng_seed"] = seed_override;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  fs::create_directories(out_dir);
  write_text_file(out_dir + "/resolved-config.json", cfg.dump(2));

  auto grid = std::make_shared<Grid>(cfg["grid"]["N"].get<int>(), cfg["grid"]["L"].get<double>());
  Scenario sc;
  try {
    sc = build_scenario(cfg["scenario"]["preset"].get<std::string>(), cfg["scenario"]["params"],
                        grid);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  SemilinearProblem& prob = sc.problem;
  prob.T_star = cfg["solver"]["T"].get<double>();
  prob.dt = cfg["solver"]["dt"].get<double>();
  prob.s = cfg["solver"]["s"].get<double>();
  prob.tol = cfg["solver"]["tol"].get<double>();
  prob.max_iterations = cfg["solver"]["max_iterations"].get<int>();
  prob.epsilon = cfg["solver"]["epsilon"].get<double>() > 0 ? cfg["solver"]["epsilon"].get<double>() : -1.0;
  prob.seed = cfg["solver"]["seed"] == "zero" ? SemilinearProblem::Seed::Zero
                                              : SemilinearProblem::Seed::Taylor;
  prob.target = cfg["solver"]["target"] == "zero" ? SemilinearProblem::Target::Zero
                                                  : SemilinearProblem::Target::PhiEps;
  prob.smoothing = cfg["solver"]["smoothing"].get<bool>();
  prob.cfl_scale = cfg["solver"]["cfl_scale"].get<double>();

  const std::string mode = cfg["solver"]["mode"].get<std::string>();
  StageWants wants = stage_plan(stage, mode);
  auto note = [&](const std::string& s) {
    if (!quiet) std::cout << s << "\n";
  };

  if (wants.check && cfg["check"]["enabled"].get<bool>()) {
    SampleSpec spec;
    spec.t = cfg["check"]["t_samples"].get<std::vector<double>>();
    spec.x_count = cfg["check"]["x_count"].get<int>();
    spec.x_max = cfg["check"]["x_max"].get<double>();
    spec.w_count = cfg["check"]["w_count"].get<int>();
    spec.w_max = cfg["check"]["w_max"].get<double>();
    DecayReport rep = check_conditions(prob.coeffs, spec);
    write_text_file(out_dir + "/decay-report.json", decay_report_json(rep));
    note(std::string("check: ") + (rep.pass ? "pass" : "FAIL"));
    if (!rep.pass) return kCheckFailed;
  }

  TransformPack pack;
  TuneReport tune_rep;
  bool have_pack = false;
  if (wants.tune || (stage == "tune")) {
    try {
      TuneOptions topt;
      topt.budget_c0 = cfg["pack"]["budget_c0"].get<double>();
      topt.tune_margin = cfg["pack"]["tune_margin"].get<double>();
      topt.M_init = cfg["pack"]["M_init"].get<double>();
      topt.M_cap = cfg["pack"]["M_cap"].get<double>();
      topt.h_init = cfg["pack"]["h"].get<double>();
      topt.neumann_order = cfg["pack"]["neumann_order"].get<int>();
      topt.neumann_target = cfg["pack"]["neumann_target"].get<double>();
      if (cfg["pack"]["tune"].get<bool>()) {
        pack = tune_constants(*grid, prob.coeffs, prob.u0, sc.cutoffs, topt, &tune_rep);
      } else {
        std::vector<double> M = cfg["pack"]["M"].get<std::vector<double>>();
        if (static_cast<int>(M.size()) != prob.coeffs.p - 1)
          M.assign(prob.coeffs.p - 1, 0.0);
        pack = build_pack(*grid, prob.coeffs.p, M, std::max(1.0, topt.h_init), sc.cutoffs,
                          topt.neumann_order);
        tune_rep.success = true;
        tune_rep.h = pack.h;
        tune_rep.neumann_norm = pack.neumann_norm;
        tune_rep.budget = defect_budget(*grid, prob.coeffs, prob.u0, topt.budget_c0);
      }
      have_pack = true;
      write_text_file(out_dir + "/pack-report.json", pack_report_json(pack, &tune_rep));
      note("tune: pack ready (||r|| = " + std::to_string(pack.neumann_norm) + ")");
    } catch (const std::exception& e) {
      write_text_file(out_dir + "/pack-report.json",
                      std::string("{\n  \"error\": \"") + e.what() + "\"\n}");
      std::cerr << "tuning failed: " << e.what() << "\n";
      return kTuneFailed;
    }
    if (stage == "tune") return kOk;
  }

  Trajectory v_out, w_out;
  NewtonReport newton_rep;
  bool have_w = false;
  if (wants.solve) {
    try {
      if (mode == "newton") {
        auto [u, rep] = newton_solve(prob);
        newton_rep = rep;
        v_out = std::move(u);
        write_text_file(out_dir + "/newton-report.json", newton_report_json(rep));
        note(std::string("newton: ") + rep.stop_reason);
        if (!rep.converged) return kNewtonFailed;
      } else {
        LinearProblem lp;
        lp.grid = grid;
        lp.coeffs = prob.coeffs;
        lp.frozen = FrozenState();  // linearizes around zero
        lp.f = prob.f;
        lp.u0 = prob.u0;
        lp.T = prob.T_star;
        lp.dt = prob.dt;
        lp.cadence = cfg["solver"]["cadence"].get<int>();
        lp.s = prob.s;
        lp.cfl_scale = prob.cfl_scale;
        if (mode == "transformed") {
          TransformedSolution sol =
              solve_transformed(lp, pack, cfg["pack"]["dense_inverse"].get<bool>());
          v_out = std::move(sol.v);
          w_out = std::move(sol.w);
          have_w = true;
        } else {
          v_out = solve_linear(lp);
        }
      }
    } catch (const SolverInstability& e) {
      std::cerr << "solver instability: " << e.what() << "\n";
      return kSolverUnstable;
    }
    double sigma = have_pack ? pack.sigma() : 0.0;
    write_norms_csv(out_dir + "/norms.csv", *grid, v_out, prob.s, sigma, prob.h, nullptr);
    if (cfg["output"]["frames"].get<bool>()) write_frames_bin(out_dir + "/frames.bin", v_out);
  }

  if (wants.audit && cfg["audit"]["enabled"].get<bool>() && mode != "newton") {
    LinearProblem lp;
    lp.grid = grid;
    lp.coeffs = prob.coeffs;
    lp.frozen = FrozenState();
    lp.f = prob.f;
    lp.u0 = prob.u0;
    lp.T = prob.T_star;
    lp.s = prob.s;
    double sigma = have_pack ? pack.sigma() : 0.0;
    EnergyAudit audit = energy_audit(lp, v_out, sigma, have_w ? &w_out : nullptr,
                                     have_pack ? &pack : nullptr,
                                     cfg["audit"]["fit_fraction"].get<double>());
    write_text_file(out_dir + "/audit-report.json", energy_audit_json(audit));
    write_norms_csv(out_dir + "/norms.csv", *grid, v_out, prob.s, sigma, prob.h, &audit);
    note("audit: margin_estimate = " + std::to_string(audit.margin_estimate) +
         ", margin_gronwall = " + std::to_string(audit.margin_gronwall));
    if (!audit.pass) return kAuditFailed;
  }
  return kOk;
}

int run_many(const json& config, const std::string& out_dir, const std::string& stage, int jobs,
             std::uint64_t seed_override) {
  if (!config.contains("runs")) return run_pipeline(config, out_dir, stage, seed_override);
  const auto& runs = config.at("runs");
  std::vector<int> codes(runs.size(), 0);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      codes[i] = run_pipeline(runs.at(i), out_dir + "/run_" + std::to_string(i), stage,
                              seed_override, true);
    }
  };
  int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(runs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (size_t i = 0; i < codes.size(); ++i)
    std::cout << "run_" << i << ": exit " << codes[i] << "\n";
  for (int c : codes)
    if (c != 0) return c;
  return kOk;
}

}  // namespace pevo
