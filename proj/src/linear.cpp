#include "pevo/linear.hpp"

namespace pevo {

namespace {

double max_ap(const LinearProblem& prob) {
  double m = 0.0;
  const Grid& g = *prob.grid;
  for (int i = 0; i <= 32; ++i) {
    double t = prob.T * i / 32.0;
    if (prob.coeffs.ap_x_dependent) {
      for (int j = 0; j < g.size(); ++j) m = std::max(m, std::abs(prob.coeffs.a_p(t, g.node(j))));
    } else {
      m = std::max(m, std::abs(prob.coeffs.a_p(t, 0.0)));
    }
  }
  return m;
}

double mean_ap(const Grid& g, const CoefficientSet& coeffs, double t) {
  if (!coeffs.ap_x_dependent) return coeffs.a_p(t, 0.0);
  double m = 0.0;
  for (int j = 0; j < g.size(); ++j) m += coeffs.a_p(t, g.node(j));
  return m / g.size();
}

VecC sample_forcing(const Grid& g, const ForcingFn& f, double t) {
  VecC out = VecC::Zero(g.size());
  if (f)
    for (int j = 0; j < g.size(); ++j) out[j] = f(t, g.node(j));
  return out;
}

// shared stepping core: rhs(t, v) = i f - A v split around the integrating
// factor exp(ell dt), ell_k = -i ap_bar(t_n) xi_k^p; the remainder callback
// receives the frozen ap_bar so the split stays exact within the step
class LawsonStepper {
 public:
  using GPart = std::function<VecC(double t, const VecC& v, double apb_frozen)>;
  LawsonStepper(const LinearProblem& prob, GPart gpart)
      : prob_(prob), g_(*prob.grid), gpart_(std::move(gpart)), mp_(g_.power_multiplier(prob.coeffs.p)) {}

  Trajectory run() {
    const int steps = prob_.steps();
    const double dt = prob_.T / steps;
    Trajectory tr;
    VecC v = prob_.u0;
    tr.times.push_back(0.0);
    tr.frames.push_back(v);
    for (int m = 0; m < steps; ++m) {
      double t = m * dt;
      v = step(t, dt, v);
      if (!v.allFinite() || g_.l2_norm(v) > prob_.blowup_threshold) throw SolverInstability(t + dt);
      if ((m + 1) % prob_.cadence == 0 || m + 1 == steps) {
        tr.times.push_back((m + 1) * dt);
        tr.frames.push_back(v);
      }
    }
    return tr;
  }

 private:
  const LinearProblem& prob_;
  const Grid& g_;
  GPart gpart_;
  VecR mp_;

  VecC expmul(double tau, double apbar, const VecC& v) const {
    VecC m(g_.size());
    for (int k = 0; k < g_.size(); ++k) m[k] = std::exp(cxd(0.0, -apbar * tau * mp_[k]));
    return g_.apply_multiplier(m, v);
  }

  VecC step(double t, double dt, const VecC& v) const {
    const double apb = mean_ap(g_, prob_.coeffs, t);
    VecC a = expmul(0.5 * dt, apb, v);
    VecC n1 = gpart_(t, v, apb);
    VecC n2 = gpart_(t + 0.5 * dt, a + 0.5 * dt * expmul(0.5 * dt, apb, n1), apb);
    VecC n3 = gpart_(t + 0.5 * dt, a + 0.5 * dt * n2, apb);
    VecC e1v = expmul(0.5 * dt, apb, a);
    VecC n4 = gpart_(t + dt, e1v + dt * expmul(0.5 * dt, apb, n3), apb);
    return e1v + (dt / 6.0) * (expmul(dt, apb, n1) + 2.0 * expmul(0.5 * dt, apb, n2 + n3) + n4);
  }
};

}  // namespace

int LinearProblem::steps() const {
  if (dt > 0.0) {
    int st = static_cast<int>(std::lround(T / dt));
    require(st >= 1 && std::abs(st * dt - T) < 1e-9 * std::max(1.0, T),
            "LinearProblem: T/dt must be integral");
    return st;
  }
  double am = max_ap(*this);
  double xim = grid->max_freq();
  double raw = 0.5 * cfl_scale / std::max(1e-12, am * std::pow(xim, coeffs.p));
  int st = static_cast<int>(std::ceil(T / raw));
  return std::max(st, 8);
}

Symbol assemble_generator(const Grid& g, const CoefficientSet& coeffs, const FrozenState& frozen,
                          double t) {
  const int n = g.size();
  Symbol A;
  A.order = coeffs.p;
  A.h = 1.0;
  A.samples.resize(n, n);
  VecC u = frozen.sample(t, n);
  VecR mp = g.power_multiplier(coeffs.p);
  for (int j = 0; j < n; ++j) {
    double apx = coeffs.a_p(t, g.node(j));
    for (int k = 0; k < n; ++k) A.samples(j, k) = cxd(0.0, 1.0) * apx * mp[k];
  }
  for (int lev = 0; lev < coeffs.p; ++lev) {
    VecR ml = g.power_multiplier(lev);
    for (int j = 0; j < n; ++j) {
      cxd c = cxd(0.0, 1.0) * coeffs.a[lev](t, g.node(j), u[j]);
      if (c == cxd(0.0, 0.0)) continue;
      for (int k = 0; k < n; ++k) A.samples(j, k) += c * ml[k];
    }
  }
  return A;
}

MatC assemble_generator_matrix(const Grid& g, const CoefficientSet& coeffs,
                               const FrozenState& frozen, double t, int min_level) {
  const int n = g.size();
  VecC u = frozen.sample(t, n);
  const MatC& S = g.synthesis_matrix();
  const MatC& F = g.analysis_matrix();
  MatC acc = MatC::Zero(n, n);

  auto add_level = [&](const VecC& coef, int lev) {
    VecR ml = g.power_multiplier(lev);
    MatC dj = S * ml.asDiagonal().toDenseMatrix().cast<cxd>() * F;
    acc += coef.asDiagonal() * dj;
  };

  VecC capx(n);
  for (int j = 0; j < n; ++j) capx[j] = cxd(0.0, 1.0) * coeffs.a_p(t, g.node(j));
  add_level(capx, coeffs.p);
  for (int lev = std::max(0, min_level); lev < coeffs.p; ++lev) {
    VecC c(n);
    for (int j = 0; j < n; ++j) c[j] = cxd(0.0, 1.0) * coeffs.a[lev](t, g.node(j), u[j]);
    add_level(c, lev);
  }
  return acc;
}

VecC apply_generator(const Grid& g, const CoefficientSet& coeffs, const FrozenState& frozen,
                     double t, const VecC& v) {
  const int n = g.size();
  VecC u = frozen.sample(t, n);
  VecC vhat = g.forward(v);
  VecC out = VecC::Zero(n);

  {  // principal
    VecR mp = g.power_multiplier(coeffs.p);
    VecC dv = g.inverse((vhat.array() * mp.cast<cxd>().array()).matrix());
    if (coeffs.ap_x_dependent) {
      for (int j = 0; j < n; ++j) out[j] = cxd(0.0, 1.0) * coeffs.a_p(t, g.node(j)) * dv[j];
    } else {
      out = cxd(0.0, 1.0) * coeffs.a_p(t, 0.0) * dv;
    }
  }
  for (int lev = 0; lev < coeffs.p; ++lev) {
    VecR ml = g.power_multiplier(lev);
    VecC dv = (lev == 0) ? v : g.inverse((vhat.array() * ml.cast<cxd>().array()).matrix());
    for (int j = 0; j < n; ++j) out[j] += cxd(0.0, 1.0) * coeffs.a[lev](t, g.node(j), u[j]) * dv[j];
  }
  return out;
}

Trajectory solve_linear(const LinearProblem& prob) {
  const Grid& g = *prob.grid;
  require(prob.u0.size() == g.size(), "solve_linear: u0/grid mismatch");
  VecR mp = g.power_multiplier(prob.coeffs.p);

  auto gpart = [&](double t, const VecC& v, double apb) -> VecC {
    // i f - A v + i ap_bar D^p v; the ap_bar part cancels the multiplier the
    // integrating factor already carries
    VecC out = apply_generator(g, prob.coeffs, prob.frozen, t, v);
    VecC vhat = g.forward(v);
    VecC dv = g.inverse((vhat.array() * mp.cast<cxd>().array()).matrix());
    out -= cxd(0.0, 1.0) * apb * dv;
    out = -out;
    if (prob.f) out += cxd(0.0, 1.0) * sample_forcing(g, prob.f, t);
    return out;
  };
  LawsonStepper stepper(prob, gpart);
  return stepper.run();
}

TransformedSolution solve_transformed(const LinearProblem& prob, const TransformPack& pack,
                                      bool dense_exact) {
  const Grid& g = *prob.grid;
  require(pack.has_dense, "solve_transformed: pack lacks dense operators");
  if (!dense_exact)
    require(pack.neumann_norm < 1.0, "solve_transformed: pack not certified (||r|| >= 1)");

  LinearProblem wprob = prob;
  wprob.u0 = invert_exp_lambda(pack, prob.u0, dense_exact);
  VecR mp = g.power_multiplier(prob.coeffs.p);

  auto gpart = [&](double t, const VecC& w, double apb) -> VecC {
    VecC Ew = pack.E * w;
    VecC AEw = apply_generator(g, prob.coeffs, prob.frozen, t, Ew);
    VecC out = -invert_exp_lambda(pack, AEw, dense_exact);
    VecC what = g.forward(w);
    VecC dw = g.inverse((what.array() * mp.cast<cxd>().array()).matrix());
    out += cxd(0.0, 1.0) * apb * dw;
    if (prob.f) {
      VecC fl = invert_exp_lambda(pack, sample_forcing(g, prob.f, t), dense_exact);
      out += cxd(0.0, 1.0) * fl;
    }
    return out;
  };
  LawsonStepper stepper(wprob, gpart);
  TransformedSolution sol;
  sol.w = stepper.run();
  sol.v.times = sol.w.times;
  for (const auto& fr : sol.w.frames) sol.v.frames.push_back(pack.E * fr);
  return sol;
}

EnergyAudit energy_audit(const LinearProblem& prob, const Trajectory& v, double sigma,
                         const Trajectory* w, const TransformPack* pack, double fit_fraction) {
  const Grid& g = *prob.grid;
  EnergyAudit audit;
  audit.sigma = sigma;

  const double qpow = 4.0 * prob.coeffs.p - 3.0;
  double unorm = 0.0;
  if (!prob.frozen.is_zero()) {
    if (prob.frozen.trajectory()) {
      for (const auto& fr : prob.frozen.trajectory()->frames)
        unorm = std::max(unorm, g.sobolev_norm(fr, qpow, prob.h));
    } else {
      unorm = g.sobolev_norm(prob.frozen.sample(0.0, g.size()), qpow, prob.h);
    }
  }
  audit.exponent_proxy = 1.0 + std::pow(unorm, qpow);

  const int m = v.size();
  require(m >= 3, "energy_audit: trajectory too short");
  int fit_end = std::max(2, static_cast<int>(std::ceil(fit_fraction * m)));

  // cumulative int ||f||_s^2
  std::vector<double> fint(m, 0.0);
  if (prob.f) {
    std::vector<double> fs(m);
    for (int i = 0; i < m; ++i) {
      double nf = g.sobolev_norm(sample_forcing(g, prob.f, v.times[i]), prob.s, prob.h);
      fs[i] = nf * nf;
    }
    for (int i = 1; i < m; ++i)
      fint[i] = fint[i - 1] + 0.5 * (v.times[i] - v.times[i - 1]) * (fs[i] + fs[i - 1]);
  }

  double u0s = g.sobolev_norm(v.frames[0], prob.s, prob.h);
  audit.ts = v.times;
  audit.lhs.resize(m);
  audit.rhs.resize(m);
  double K = audit.exponent_proxy;
  audit.C_fit = 0.0;
  for (int i = 0; i < m; ++i) {
    double lv = g.sobolev_norm(v.frames[i], prob.s - sigma, prob.h);
    audit.lhs[i] = lv * lv;
    double base = std::exp(K * v.times[i]) * (u0s * u0s + fint[i]);
    audit.rhs[i] = base;
    if (i < fit_end) audit.C_fit = std::max(audit.C_fit, audit.lhs[i] / std::max(base, 1e-300));
  }
  audit.margin_estimate = std::numeric_limits<double>::infinity();
  for (int i = fit_end; i < m; ++i) {
    double rhs = audit.C_fit * audit.rhs[i];
    double mg = (audit.lhs[i] <= 1e-300) ? 1e9 : rhs / audit.lhs[i];
    audit.margin_estimate = std::min(audit.margin_estimate, mg);
  }
  if (m <= fit_end) audit.margin_estimate = 1.0;
  audit.margin_estimate = std::min(audit.margin_estimate, 1e9);
  for (int i = 0; i < m; ++i) audit.rhs[i] *= audit.C_fit;

  // differential Gronwall on the conjugated variable (or v when untransformed)
  const Trajectory& wt = w ? *w : v;
  std::vector<double> E(wt.size()), S(wt.size());
  for (int i = 0; i < wt.size(); ++i) {
    double n0 = g.l2_norm(wt.frames[i]);
    E[i] = n0 * n0;
    double nf = 0.0;
    if (prob.f) {
      VecC fv = sample_forcing(g, prob.f, wt.times[i]);
      if (pack) fv = invert_exp_lambda(*pack, fv, true);
      nf = g.l2_norm(fv);
    }
    S[i] = nf * nf + E[i];
  }
  int mw = wt.size();
  std::vector<double> dE(mw, 0.0);
  for (int i = 0; i < mw; ++i) {
    int w0 = std::clamp(i - 2, 0, mw - std::min(5, mw));
    int width = std::min(5, mw);
    std::vector<double> xs(width);
    for (int q = 0; q < width; ++q) xs[q] = wt.times[w0 + q] - wt.times[i];
    auto wts = fd_weights(0.0, xs, 1);
    for (int q = 0; q < width; ++q) dE[i] += wts[q] * E[w0 + q];
  }
  int fit_w = std::max(2, static_cast<int>(std::ceil(fit_fraction * mw)));
  double cfit = 1.0;
  for (int i = 0; i < fit_w; ++i)
    if (S[i] > 1e-300) cfit = std::max(cfit, dE[i] / (audit.exponent_proxy * S[i]));
  audit.K_gronwall = cfit * audit.exponent_proxy;
  audit.margin_gronwall = 1e9;
  for (int i = fit_w; i < mw; ++i) {
    if (dE[i] <= 0.0) continue;
    audit.margin_gronwall = std::min(audit.margin_gronwall, audit.K_gronwall * S[i] / dE[i]);
  }
  audit.pass = audit.margin_estimate >= 1.0 - 1e-9 && audit.margin_gronwall >= 1.0 - 1e-9;
  return audit;
}

}  // namespace pevo
