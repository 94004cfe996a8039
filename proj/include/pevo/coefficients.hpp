#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pevo/trajectory.hpp"

namespace pevo {

using CoeffFn = std::function<cxd(double t, double x, cxd w)>;

/// Coefficients of the p-evolution operator
/// D_t + a_p(t[,x]) D_x^p + sum_{j<p} a_j(t,x,w) D_x^j
/// together with the control function gamma and the constants of the
/// hypotheses. Coefficient functions must be pure and reentrant.
struct CoefficientSet {
  int p = 2;
  bool ap_x_dependent = false;
  std::function<double(double t, double x)> a_p;
  std::vector<CoeffFn> a;   // a[j], j = 0..p-1
  std::vector<CoeffFn> dw;  // analytic d/dw of a[j] where known; missing -> FD
  std::function<double(cxd)> gamma;
  double C_p = 1.0;
  double C = 1.0;

  cxd eval(int j, double t, double x, cxd w) const { return a[j](t, x, w); }
  /// Wirtinger derivative d_w a_j at (t,x,w): analytic when supplied,
  /// otherwise (d_Re - i d_Im)/2 by 4th-order differences.
  cxd eval_dw(int j, double t, double x, cxd w) const;
  double gamma_sup(const VecC& u) const;  // sup over samples of gamma(u_i)
};

/// Where each condition was worst, and whether it stayed under C.
struct ConditionResult {
  std::string name;
  int j = -1;
  int beta = 0;
  int gamma_order = 0;
  bool pass = true;
  double worst_ratio = 0.0;  // sup |deriv| <x>^e / gamma(w)
  double threshold = 0.0;
  double fitted_constant = 0.0;  // smallest C that would pass
  double t = 0.0, x = 0.0;       // witness point
  cxd w{0.0, 0.0};
};

struct DecayReport {
  bool pass = true;
  std::vector<ConditionResult> conditions;
  const ConditionResult* find(const std::string& name) const;
};

/// Sampling lattice replacing the sup over (t,x,w).
struct SampleSpec {
  std::vector<double> t{0.0};
  int x_count = 41;       // symmetric, geometrically spaced, includes 0
  double x_max = 80.0;
  int w_count = 5;        // per axis; w lattice is w_count x w_count
  double w_max = 2.0;
  std::vector<double> x_lattice() const;
  std::vector<cxd> w_lattice() const;
};

/// Numerical verification of the hypotheses (ap), (im), (re), (dew),
/// (Rea2), (a2), (a1), and the odd-derivative decay of an x-dependent
/// principal coefficient.
DecayReport check_conditions(const CoefficientSet& coeffs, const SampleSpec& spec);

/// x |-> a_j(t, x, u(x)) sampled on the grid.
VecC composed_coefficient(const Grid& g, const CoefficientSet& coeffs, int j, const VecC& u,
                          double t);

/// Composed-coefficient bounds: spectral D_x^beta of a_j(t,x,u(x)) against
/// C' gamma(u)(1 + ||u||_{1+beta}^beta), real part unweighted and imaginary
/// part <x>-weighted. Fitted constants are reported; verdicts compare
/// against `threshold` when given (otherwise informational).
DecayReport check_composed_bounds(const Grid& g, const CoefficientSet& coeffs, const VecC& u,
                                  int beta_max, double t = 0.0,
                                  std::optional<double> threshold = std::nullopt);

/// Coefficients of the linearized operator: a~_j = a_j for j >= 1 and
/// a~_0 = a_0 + sum_h d_w a_h(t,x,u(t,x)) D_x^h u(t,x) for the frozen u.
CoefficientSet linearized_coefficients(const Grid& g, const CoefficientSet& coeffs,
                                       std::shared_ptr<const Trajectory> u);

}  // namespace pevo
