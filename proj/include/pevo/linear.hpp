#pragma once

#include "pevo/coefficients.hpp"
#include "pevo/lambda.hpp"

namespace pevo {

using ForcingFn = std::function<cxd(double t, double x)>;

/// Data of the linearized Cauchy problem P_u(D) v = f, v(0) = u0.
struct LinearProblem {
  std::shared_ptr<const Grid> grid;
  CoefficientSet coeffs;
  FrozenState frozen;  // the u the coefficients are evaluated along
  ForcingFn f;         // null -> 0
  VecC u0;
  double T = 1.0;
  double dt = 0.0;  // <= 0: 0.5 / (max|a_p| ximax^p), rounded so T/dt is integral
  int cadence = 1;
  double s = 2.0;  // Sobolev index carried by diagnostics
  double h = 1.0;
  double cfl_scale = 1.0;
  double blowup_threshold = 1e12;

  int steps() const;  // resolved step count
};

/// A(t,x,u(t,x),xi) = i a_p(t[,x]) xi^p + sum_j i a_j(t,x,u(t,x)) xi^j.
Symbol assemble_generator(const Grid& g, const CoefficientSet& coeffs, const FrozenState& frozen,
                          double t);

/// Dense matrix of the generator keeping only levels j >= min_level.
MatC assemble_generator_matrix(const Grid& g, const CoefficientSet& coeffs,
                               const FrozenState& frozen, double t, int min_level = 0);

/// A v without forming the symbol (coefficient fields times D_x^j v).
VecC apply_generator(const Grid& g, const CoefficientSet& coeffs, const FrozenState& frozen,
                     double t, const VecC& v);

/// Method of lines for dv/dt = i f - A v, Lawson-type RK4: the x-independent
/// part of the principal term is handled by an exact integrating factor.
Trajectory solve_linear(const LinearProblem& prob);

struct TransformedSolution {
  Trajectory w;  // conjugated variable
  Trajectory v;  // e^Lambda w
};

/// Same flow after the change of variable v = e^Lambda w; the pack must be
/// certified unless dense_exact.
TransformedSolution solve_transformed(const LinearProblem& prob, const TransformPack& pack,
                                      bool dense_exact = false);

/// Energy diagnostics against the a-priori estimate
/// ||v(t)||_{s-sigma}^2 <= C e^{(1+||u||_{4p-3}^{4p-3}) t}(||u0||_s^2 + int ||f||_s^2)
/// with C fitted on the leading fraction of the run, plus the differential
/// Gronwall check d/dt ||w||_0^2 <= K (||P_L w||_0^2 + ||w||_0^2).
struct EnergyAudit {
  double sigma = 0.0;
  double exponent_proxy = 1.0;  // 1 + sup_t ||u||_{4p-3}^{4p-3}
  double C_fit = 0.0;
  double margin_estimate = 0.0;   // min_t RHS/LHS past the fit window
  double K_gronwall = 0.0;        // fitted differential constant
  double margin_gronwall = 0.0;   // min_t K*S/max(dE,0) past the fit window
  bool pass = false;
  std::vector<double> ts, lhs, rhs;  // per stored frame, for export
};

EnergyAudit energy_audit(const LinearProblem& prob, const Trajectory& v, double sigma,
                         const Trajectory* w = nullptr, const TransformPack* pack = nullptr,
                         double fit_fraction = 0.1);

}  // namespace pevo
