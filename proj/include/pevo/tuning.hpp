#pragma once

#include "pevo/linear.hpp"

namespace pevo {

struct TuneOptions {
  double budget_c0 = 1.0;      // defect budget c0 (1 + gamma(u))(1 + ||u||_{4p-3}^{4p-3})
  double tune_margin = 0.8;    // doubling stops at defect >= -margin * budget
  double M_init = 1.0;
  double M_cap = 65536.0;
  double h_init = 1.0;
  double h_cap = 1048576.0;
  int neumann_order = 8;
  double neumann_target = 0.5;  // certify h once ||r|| drops below this
  double t_sample = 0.0;        // generator frozen at this time
};

struct TuneLevelInfo {
  int k = 0;           // level p-k
  double M = 0.0;
  double defect = 0.0;  // after the final doubling
  int doublings = 0;
  double paper_floor = 0.0;  // closed-form lower bound (first level only)
};

struct TuneReport {
  bool success = false;
  std::string failure;
  std::vector<TuneLevelInfo> levels;
  double h = 0.0;
  double neumann_norm = 0.0;
  double budget = 0.0;
  double gamma_bar = 0.0;
  double u_norm_pow = 0.0;      // ||u||_{4p-3}^{4p-3}
  double final_defect = 0.0;    // full generator, conjugated
};

/// Choose M_{p-1} >= the closed-form floor of the sub-leading level, then
/// double each M_{p-k} outer-to-inner until the weighted Hermitian part of
/// the conjugated generator truncated to levels >= p-k clears the budget;
/// finally raise h above max(M_{p-2},...,M_1) until the Neumann norm
/// certifies the inverse, and re-verify the full-generator defect.
TransformPack tune_constants(const Grid& g, const CoefficientSet& coeffs, const VecC& u_frozen,
                             const CutoffPair& cut, const TuneOptions& opts = {},
                             TuneReport* report = nullptr);

/// Budget the tuner targets: c0 (1 + gamma_bar(u))(1 + ||u||_{4p-3}^{4p-3}).
double defect_budget(const Grid& g, const CoefficientSet& coeffs, const VecC& u, double c0);

/// sup_x <x> |Im a_{p-1}(t,x,u(x))| / ((2^{p-2}/sqrt(5)^{p-1}) p C_p):
/// the first-level lower bound with the decay constant fitted on the grid.
double paper_floor_level1(const Grid& g, const CoefficientSet& coeffs, const VecC& u, double t);

}  // namespace pevo
