#pragma once

#include "pevo/linear.hpp"

namespace pevo {

/// The semilinear Cauchy problem P_u(D)u = f, u(0) = u0 on [0, T*].
struct SemilinearProblem {
  std::shared_ptr<const Grid> grid;
  CoefficientSet coeffs;
  VecC u0;
  ForcingFn f;  // null -> 0
  double T_star = 0.05;
  double dt = 0.0;  // <= 0: CFL default
  double s = 4.0;   // seminorms recorded up to this index
  double h = 1.0;
  double tol = 1e-6;
  int max_iterations = 10;
  double epsilon = -1.0;  // mollifier scale; <= 0 -> T*/8

  enum class Seed { Taylor, Zero, Custom };
  Seed seed = Seed::Taylor;
  Trajectory custom_seed;

  enum class Target { PhiEps, Zero };
  Target target = Target::PhiEps;

  bool smoothing = false;  // zero the top third of each Newton update's spectrum
  double cfl_scale = 1.0;

  int steps() const;
  double resolved_epsilon() const { return epsilon > 0.0 ? epsilon : T_star / 8.0; }
};

/// T(u) = u - u0 + i int_0^t [a_p D_x^p u + sum_j a_j(s,x,u) D_x^j u - f] ds.
/// T(u) == 0 on [0,T*] iff u solves the integral form of the Cauchy problem.
Trajectory evaluate_T(const SemilinearProblem& prob, const Trajectory& u);

/// DT(u)v = v + i int a_p D^p v + i sum_j int a~_j(s,x,u) D^j v ds.
Trajectory frechet_DT(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& v);

/// The right inverse S(u,h): solves the linearized Cauchy problem
/// P~_u(D) v = D_t h, v(0) = h(0), so that DT(u) v = h.
Trajectory solve_S(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& hh);

/// First-order Taylor seed w(t) = u0 - i t (a_p(0) D^p u0 + sum a_j(0,x,u0) D^j u0 - f(0)).
Trajectory taylor_seed(const SemilinearProblem& prob);

/// phi_eps(t,x) = int_0^t rho(s/eps) d_s(Tw)(s,x) ds; frames with t <= eps
/// are exactly zero.
Trajectory mollified_target(const SemilinearProblem& prob, const Trajectory& Tw, double eps);

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;          // graded seminorm |||T(u_n) - target|||_0
  std::vector<double> contraction;        // residuals[i+1]/residuals[i]
  double final_pde_residual = 0.0;        // sup_t ||P_u u - f||_0 on the checked interval
  double certified_pde_residual = 0.0;    // same on the certified interval
  double certified_from = 0.0, certified_to = 0.0;
  double checked_from = 0.0, checked_to = 0.0;
  double target_closeness = 0.0;  // |||Tw - phi_eps|||_0 when the target is mollified
  std::string stop_reason;
};

std::pair<Trajectory, NewtonReport> newton_solve(const SemilinearProblem& prob);

/// sup_t || P~~ (u - v) ||_0 with the homotopy zero-order coefficient
/// int_0^1 d_w a_j(t,x,v + theta(u-v)) dtheta D_x^j v; near zero certifies
/// that u - v solves the homogeneous problem.
double uniqueness_residual(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& v);

/// sup over frames in [t_from, t_to] of ||P_u(D)u - f||_0 (D_t by finite
/// differences on the stored grid).
double pde_residual(const SemilinearProblem& prob, const Trajectory& u, double t_from, double t_to);

}  // namespace pevo
