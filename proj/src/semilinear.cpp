#include "pevo/semilinear.hpp"

#include "pevo/cutoffs.hpp"

namespace pevo {

namespace {

VecC sample_f(const Grid& g, const ForcingFn& f, double t) {
  VecC out = VecC::Zero(g.size());
  if (f)
    for (int j = 0; j < g.size(); ++j) out[j] = f(t, g.node(j));
  return out;
}

// i [a_p D^p u + sum_j a_j(t,x,u) D^j u - f](t) for a stored frame
VecC integrand_frame(const SemilinearProblem& prob, double t, const VecC& u) {
  const Grid& g = *prob.grid;
  FrozenState self(u);
  VecC val = apply_generator(g, prob.coeffs, self, t, u);  // already includes the i factors
  if (prob.f) val -= cxd(0.0, 1.0) * sample_f(g, prob.f, t);
  return val;
}

}  // namespace

int SemilinearProblem::steps() const {
  LinearProblem lp;
  lp.grid = grid;
  lp.coeffs = coeffs;
  lp.T = T_star;
  lp.dt = dt;
  lp.cfl_scale = cfl_scale;
  return lp.steps();
}

Trajectory evaluate_T(const SemilinearProblem& prob, const Trajectory& u) {
  const Grid& g = *prob.grid;
  require(!u.empty() && u.frames[0].size() == g.size(), "evaluate_T: trajectory/grid mismatch");
  Trajectory integrand;
  integrand.times = u.times;
  for (int m = 0; m < u.size(); ++m)
    integrand.frames.push_back(integrand_frame(prob, u.times[m], u.frames[m]));
  Trajectory acc = cumulative_time_integral(integrand);
  Trajectory out;
  out.times = u.times;
  for (int m = 0; m < u.size(); ++m) out.frames.push_back(u.frames[m] - prob.u0 + acc.frames[m]);
  return out;
}

Trajectory frechet_DT(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& v) {
  const Grid& g = *prob.grid;
  require(u.size() == v.size(), "frechet_DT: trajectories must share the time grid");
  const int p = prob.coeffs.p;

  Trajectory integrand;
  integrand.times = u.times;
  for (int m = 0; m < u.size(); ++m) {
    double t = u.times[m];
    const VecC& uf = u.frames[m];
    const VecC& vf = v.frames[m];
    VecC val = VecC::Zero(g.size());
    // a_p D^p v + sum_{j} a_j(t,x,u) D^j v
    FrozenState fu(uf);
    val = apply_generator(g, prob.coeffs, fu, t, vf);
    // + sum_h d_w a_h(t,x,u) D^h u . v  (the linearized zero-order term)
    for (int hh = 0; hh < p; ++hh) {
      VecC dhu = g.derivative(uf, hh);
      for (int j = 0; j < g.size(); ++j)
        val[j] += cxd(0.0, 1.0) * prob.coeffs.eval_dw(hh, t, g.node(j), uf[j]) * dhu[j] * vf[j];
    }
    integrand.frames.push_back(val);
  }
  Trajectory acc = cumulative_time_integral(integrand);
  Trajectory out;
  out.times = u.times;
  for (int m = 0; m < u.size(); ++m) out.frames.push_back(v.frames[m] + acc.frames[m]);
  return out;
}

Trajectory solve_S(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& hh) {
  const Grid& g = *prob.grid;
  require(u.size() == hh.size(), "solve_S: trajectories must share the time grid");
  auto u_shared = std::make_shared<Trajectory>(u);
  CoefficientSet lin = linearized_coefficients(g, prob.coeffs, u_shared);

  auto dh = std::make_shared<Trajectory>(time_derivative(hh));
  const double L = g.half_length();
  const int n = g.size();
  const double dxg = 2.0 * L / n;
  ForcingFn f = [dh, L, n, dxg](double t, double x) -> cxd {
    VecC fr = dh->at_cubic(t);
    double pos = (x + L) / dxg;
    int j = static_cast<int>(std::lround(pos));
    // forcing is only sampled at grid nodes by the stepper
    j = ((j % n) + n) % n;
    return cxd(0.0, -1.0) * fr[j];  // D_t h = -i d_t h
  };

  LinearProblem lp;
  lp.grid = prob.grid;
  lp.coeffs = lin;
  lp.frozen = FrozenState(u_shared);
  lp.f = f;
  lp.u0 = hh.frames[0];
  lp.T = prob.T_star;
  lp.dt = u.dt();
  lp.cadence = 1;
  lp.s = prob.s;
  lp.h = prob.h;
  return solve_linear(lp);
}

Trajectory taylor_seed(const SemilinearProblem& prob) {
  const Grid& g = *prob.grid;
  const int steps = prob.steps();
  VecC phi = integrand_frame(prob, 0.0, prob.u0);  // i(a_p D^p u0 + ... - f(0))
  Trajectory tr;
  for (int m = 0; m <= steps; ++m) {
    double t = prob.T_star * m / steps;
    tr.times.push_back(t);
    tr.frames.push_back(prob.u0 - t * phi);
  }
  return tr;
}

Trajectory mollified_target(const SemilinearProblem& prob, const Trajectory& Tw, double eps) {
  require(eps > 0.0 && eps < prob.T_star / 2.0, "mollified_target: need 0 < eps < T*/2");
  Trajectory dTw = time_derivative(Tw);
  Trajectory integrand;
  integrand.times = Tw.times;
  for (int m = 0; m < Tw.size(); ++m)
    integrand.frames.push_back(rho_time(Tw.times[m] / eps) * dTw.frames[m]);
  Trajectory phi = cumulative_time_integral(integrand);
  for (int m = 0; m < phi.size(); ++m)
    if (phi.times[m] <= eps + 1e-12) phi.frames[m].setZero();
  return phi;
}

namespace {

void smooth_update(const Grid& g, Trajectory& delta) {
  const int n = g.size();
  for (auto& fr : delta.frames) {
    VecC hat = g.forward(fr);
    for (int k = 0; k < n; ++k)
      if (std::abs(g.freq(k)) > (2.0 / 3.0) * g.max_freq()) hat[k] = 0.0;
    fr = g.inverse(hat);
  }
}

}  // namespace

std::pair<Trajectory, NewtonReport> newton_solve(const SemilinearProblem& prob) {
  const Grid& g = *prob.grid;
  NewtonReport rep;
  const double eps = prob.resolved_epsilon();

  Trajectory u;
  switch (prob.seed) {
    case SemilinearProblem::Seed::Taylor: u = taylor_seed(prob); break;
    case SemilinearProblem::Seed::Zero: {
      u = taylor_seed(prob);
      for (auto& fr : u.frames) fr.setZero();
      break;
    }
    case SemilinearProblem::Seed::Custom: u = prob.custom_seed; break;
  }

  Trajectory target;
  bool has_target = prob.target == SemilinearProblem::Target::PhiEps;
  if (has_target) {
    Trajectory w = taylor_seed(prob);
    Trajectory Tw = evaluate_T(prob, w);
    target = mollified_target(prob, Tw, eps);
    Trajectory gap = axpy(-1.0, target, Tw);
    rep.target_closeness = graded_seminorm(g, gap, 0.0, prob.h);
  }

  int rising = 0;
  for (int it = 0; it <= prob.max_iterations; ++it) {
    Trajectory Tu = evaluate_T(prob, u);
    Trajectory r = has_target ? axpy(-1.0, Tu, target) : scale(-1.0, Tu);
    double res = graded_seminorm(g, r, 0.0, prob.h);
    rep.residuals.push_back(res);
    if (rep.residuals.size() >= 2) {
      double prev = rep.residuals[rep.residuals.size() - 2];
      rep.contraction.push_back(res / std::max(prev, 1e-300));
      rising = (res > prev) ? rising + 1 : 0;
    }
    if (res <= prob.tol) {
      rep.converged = true;
      rep.iterations = it;
      rep.stop_reason = "residual below tolerance";
      break;
    }
    if (rising >= 3) {
      rep.iterations = it;
      rep.stop_reason = "diverged: residual increased for 3 consecutive iterations";
      break;
    }
    if (it == prob.max_iterations) {
      rep.iterations = it;
      rep.stop_reason = "iteration budget exhausted";
      break;
    }
    Trajectory delta = solve_S(prob, u, r);
    if (prob.smoothing) smooth_update(g, delta);
    u = axpy(1.0, delta, u);
  }

  if (has_target) {
    rep.certified_from = 0.0;
    rep.certified_to = eps;
    rep.checked_from = 0.0;
    rep.checked_to = prob.T_star;
    rep.certified_pde_residual = pde_residual(prob, u, 0.0, eps);
    rep.final_pde_residual = rep.certified_pde_residual;
  } else {
    rep.certified_from = rep.checked_from = 0.0;
    rep.certified_to = rep.checked_to = prob.T_star;
    rep.certified_pde_residual = pde_residual(prob, u, 0.0, prob.T_star);
    rep.final_pde_residual = rep.certified_pde_residual;
  }
  return {std::move(u), rep};
}

double pde_residual(const SemilinearProblem& prob, const Trajectory& u, double t_from, double t_to) {
  const Grid& g = *prob.grid;
  Trajectory du = time_derivative(u);
  double sup = 0.0;
  for (int m = 0; m < u.size(); ++m) {
    double t = u.times[m];
    if (t < t_from - 1e-12 || t > t_to + 1e-12) continue;
    // P_u u - f = D_t u + (1/i) integrand_frame, with D_t u = -i d_t u
    VecC res =
        cxd(0.0, -1.0) * (du.frames[m] + integrand_frame(prob, t, u.frames[m]));
    sup = std::max(sup, g.l2_norm(res));
  }
  return sup;
}

double uniqueness_residual(const SemilinearProblem& prob, const Trajectory& u, const Trajectory& v) {
  const Grid& g = *prob.grid;
  require(u.size() == v.size(), "uniqueness_residual: trajectories must share the time grid");
  const int p = prob.coeffs.p;
  static const double gn[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                               0.7966664774136267,  0.9602898564975363};
  static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};

  Trajectory diff = axpy(-1.0, v, u);  // u - v
  Trajectory ddiff = time_derivative(diff);
  double sup = 0.0;
  for (int m = 0; m < u.size(); ++m) {
    double t = u.times[m];
    const VecC& uf = u.frames[m];
    const VecC& vf = v.frames[m];
    const VecC& df = diff.frames[m];
    // P_u(D)(u-v) = D_t(u-v) + (1/i) A_u (u-v); apply_generator carries the i
    FrozenState fu(uf);
    VecC res = cxd(0.0, -1.0) * (ddiff.frames[m] + apply_generator(g, prob.coeffs, fu, t, df));
    // + sum_j [int_0^1 d_w a_j(t,x,v+theta(u-v)) dtheta D_x^j v] (u-v)
    for (int j = 0; j < p; ++j) {
      VecC djv = g.derivative(vf, j);
      for (int i = 0; i < g.size(); ++i) {
        cxd homo = 0.0;
        for (int q = 0; q < 8; ++q) {
          double theta = 0.5 + 0.5 * gn[q];
          homo += 0.5 * gw[q] * prob.coeffs.eval_dw(j, t, g.node(i), vf[i] + theta * (uf[i] - vf[i]));
        }
        res[i] += homo * djv[i] * df[i];
      }
    }
    sup = std::max(sup, g.l2_norm(res));
  }
  return sup;
}

}  // namespace pevo
