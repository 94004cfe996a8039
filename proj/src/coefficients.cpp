#include "pevo/coefficients.hpp"

#include <algorithm>

namespace pevo {

namespace {

// FD step balancing truncation against roundoff for the d-th derivative;
// the first w-derivative keeps the documented 1e-4 (1+|w|).
double fd_step(double scale, int d, bool is_w) {
  if (is_w && d == 1) return 1e-4 * scale;
  return scale * std::pow(10.0, -16.0 / (d + 4));
}

// d-th x-derivative of a coefficient closure, 4th-order centered
cxd deriv_x(const CoeffFn& f, int d, double t, double x, cxd w) {
  if (d == 0) return f(t, x, w);
  double hx = fd_step(1.0 + std::abs(x), d, false);
  FdStencil st = central_fd(d, hx);
  cxd acc = 0.0;
  for (size_t q = 0; q < st.offsets.size(); ++q) acc += st.weights[q] * f(t, x + st.offsets[q] * hx, w);
  return acc;
}

// gd-th derivative along a w-axis (dir = 1 or i) of x |-> D_x^beta-like inner
cxd deriv_w_axis(const std::function<cxd(cxd)>& f, int gd, cxd w, cxd dir) {
  double hw = fd_step(1.0 + std::abs(w), gd, true);
  FdStencil st = central_fd(gd, hw);
  cxd acc = 0.0;
  for (size_t q = 0; q < st.offsets.size(); ++q) acc += st.weights[q] * f(w + dir * (st.offsets[q] * hw));
  return acc;
}

cxd ipow_minus_i(int beta) {
  static const cxd tab[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return tab[beta & 3];
}

struct Accumulator {
  ConditionResult res;
  void offer(double ratio, double t, double x, cxd w) {
    if (ratio > res.worst_ratio) {
      res.worst_ratio = ratio;
      res.t = t;
      res.x = x;
      res.w = w;
    }
  }
  void finish(double threshold, DecayReport& rep) {
    res.threshold = threshold;
    res.fitted_constant = res.worst_ratio;
    res.pass = res.worst_ratio <= threshold * (1.0 + 1e-9) + 1e-12;
    rep.pass = rep.pass && res.pass;
    rep.conditions.push_back(res);
  }
};

}  // namespace

cxd CoefficientSet::eval_dw(int j, double t, double x, cxd w) const {
  if (j < static_cast<int>(dw.size()) && dw[j]) return dw[j](t, x, w);
  double hw = 1e-4 * (1.0 + std::abs(w));
  auto probe = [&](cxd dir) {
    cxd f1 = a[j](t, x, w + dir * hw), f2 = a[j](t, x, w + dir * (2 * hw));
    cxd fm1 = a[j](t, x, w - dir * hw), fm2 = a[j](t, x, w - dir * (2 * hw));
    return (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * hw);
  };
  cxd dre = probe({1.0, 0.0});
  cxd dim = probe({0.0, 1.0});
  return 0.5 * (dre - cxd(0.0, 1.0) * dim);  // Wirtinger d/dw
}

double CoefficientSet::gamma_sup(const VecC& u) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) s = std::max(s, gamma(u[i]));
  return s;
}

const ConditionResult* DecayReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<double> SampleSpec::x_lattice() const {
  std::vector<double> xs{0.0};
  int half = std::max(1, (x_count - 1) / 2);
  double lmax = std::log1p(x_max);
  for (int i = 1; i <= half; ++i) {
    double v = std::expm1(lmax * i / half);
    xs.push_back(v);
    xs.push_back(-v);
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

std::vector<cxd> SampleSpec::w_lattice() const {
  std::vector<cxd> ws;
  for (int a = 0; a < w_count; ++a)
    for (int b = 0; b < w_count; ++b) {
      double re = (w_count == 1) ? 0.0 : -w_max + 2.0 * w_max * a / (w_count - 1);
      double im = (w_count == 1) ? 0.0 : -w_max + 2.0 * w_max * b / (w_count - 1);
      ws.emplace_back(re, im);
    }
  return ws;
}

DecayReport check_conditions(const CoefficientSet& coeffs, const SampleSpec& spec) {
  const int p = coeffs.p;
  require(p >= 2, "check_conditions: p >= 2");
  require(static_cast<int>(coeffs.a.size()) == p, "check_conditions: need a_0..a_{p-1}");
  DecayReport rep;
  auto xs = spec.x_lattice();
  auto ws = spec.w_lattice();

  auto eval_gamma = [&](cxd w) {
    double gv = coeffs.gamma(w);
    if (!(gv > 0.0) || !std::isfinite(gv))
      throw std::invalid_argument("check_conditions: gamma must be positive and finite");
    return gv;
  };

  {  // (ap): a_p >= C_p
    Accumulator acc;
    acc.res.name = "ap";
    double worst = std::numeric_limits<double>::infinity();
    double wt = 0, wx = 0;
    for (double t : spec.t)
      for (double x : (coeffs.ap_x_dependent ? xs : std::vector<double>{0.0})) {
        double v = coeffs.a_p(t, x);
        if (!std::isfinite(v)) throw std::invalid_argument("check_conditions: a_p not finite");
        if (v < worst) {
          worst = v;
          wt = t;
          wx = x;
        }
      }
    acc.res.worst_ratio = worst;
    acc.res.t = wt;
    acc.res.x = wx;
    acc.res.threshold = coeffs.C_p;
    acc.res.fitted_constant = worst;
    acc.res.pass = worst >= coeffs.C_p * (1.0 - 1e-12) - 1e-12;
    rep.pass = rep.pass && acc.res.pass;
    rep.conditions.push_back(acc.res);
  }

  auto sweep = [&](Accumulator& acc, const std::function<double(double, double, cxd)>& ratio_fn) {
    for (double t : spec.t)
      for (double x : xs)
        for (cxd w : ws) {
          double r = ratio_fn(t, x, w);
          if (!std::isfinite(r))
            throw std::invalid_argument("check_conditions: non-finite coefficient value at x=" +
                                        std::to_string(x));
          acc.offer(r, t, x, w);
        }
  };

  for (int j = 3; j <= p - 1; ++j) {
    for (int beta = 0; beta <= j - 1; ++beta) {  // (re)
      Accumulator acc;
      acc.res.name = "re(j=" + std::to_string(j) + ",b=" + std::to_string(beta) + ")";
      acc.res.j = j;
      acc.res.beta = beta;
      sweep(acc, [&](double t, double x, cxd w) {
        cxd v = ipow_minus_i(beta) * deriv_x(coeffs.a[j], beta, t, x, w);
        return std::abs(v.real()) / eval_gamma(w);
      });
      acc.finish(coeffs.C, rep);
    }
    for (int beta = 0; beta <= 2 * j - 1; ++beta) {  // (im)
      Accumulator acc;
      acc.res.name = "im(j=" + std::to_string(j) + ",b=" + std::to_string(beta) + ")";
      acc.res.j = j;
      acc.res.beta = beta;
      double e = static_cast<double>(j - beta / 2) / (p - 1);
      sweep(acc, [&](double t, double x, cxd w) {
        cxd v = ipow_minus_i(beta) * deriv_x(coeffs.a[j], beta, t, x, w);
        return std::abs(v.imag()) * std::pow(xbracket(x), e) / eval_gamma(w);
      });
      acc.finish(coeffs.C, rep);
    }
    for (int go = 1; go + 0 <= 2 * j - 1; ++go)  // (dew)
      for (int beta = 0; go + beta <= 2 * j - 1; ++beta) {
        Accumulator acc;
        acc.res.name =
            "dew(j=" + std::to_string(j) + ",g=" + std::to_string(go) + ",b=" + std::to_string(beta) + ")";
        acc.res.j = j;
        acc.res.beta = beta;
        acc.res.gamma_order = go;
        double e = static_cast<double>(j - (go + beta) / 2) / (p - 1);
        sweep(acc, [&](double t, double x, cxd w) {
          auto inner = [&](cxd wp) { return deriv_x(coeffs.a[j], beta, t, x, wp); };
          double mag = std::max(std::abs(deriv_w_axis(inner, go, w, {1.0, 0.0})),
                                std::abs(deriv_w_axis(inner, go, w, {0.0, 1.0})));
          return mag * std::pow(xbracket(x), e) / eval_gamma(w);
        });
        acc.finish(coeffs.C, rep);
      }
  }

  if (p >= 3) {
    {
      Accumulator acc;
      acc.res.name = "Rea2";
      acc.res.j = 2;
      sweep(acc, [&](double t, double x, cxd w) {
        return std::abs(coeffs.a[2](t, x, w).real()) / eval_gamma(w);
      });
      acc.finish(coeffs.C, rep);
    }
    {
      Accumulator acc;
      acc.res.name = "a2";
      acc.res.j = 2;
      double e = 2.0 / (p - 1);
      sweep(acc, [&](double t, double x, cxd w) {
        return std::abs(coeffs.a[2](t, x, w).imag()) * std::pow(xbracket(x), e) / eval_gamma(w);
      });
      acc.finish(coeffs.C, rep);
    }
  }

  {  // (a1)
    Accumulator acc;
    acc.res.name = "a1";
    acc.res.j = 1;
    double e = 1.0 / (p - 1);
    sweep(acc, [&](double t, double x, cxd w) {
      double s = std::abs(coeffs.a[1](t, x, w).imag());
      if (p >= 3) {
        cxd d1 = ipow_minus_i(1) * deriv_x(coeffs.a[2], 1, t, x, w);
        s += std::abs(d1.imag());
        auto inner = [&](cxd wp) { return coeffs.a[2](t, x, wp); };
        s += std::max(std::abs(deriv_w_axis(inner, 1, w, {1.0, 0.0})),
                      std::abs(deriv_w_axis(inner, 1, w, {0.0, 1.0})));
      }
      return s * std::pow(xbracket(x), e) / eval_gamma(w);
    });
    acc.finish(coeffs.C, rep);
  }

  if (coeffs.ap_x_dependent) {  // Theorem-4.1 odd-derivative decay, no gamma
    for (int beta = 1; beta / 2 <= p - 1 && beta <= 2 * p - 1; beta += 2) {
      Accumulator acc;
      acc.res.name = "apx(b=" + std::to_string(beta) + ")";
      acc.res.j = p;
      acc.res.beta = beta;
      double e = static_cast<double>(p - beta / 2) / (p - 1);
      auto apfn = [&](double t, double x, cxd) { return cxd(coeffs.a_p(t, x), 0.0); };
      for (double t : spec.t)
        for (double x : xs) {
          CoeffFn fn = apfn;
          cxd v = deriv_x(fn, beta, t, x, cxd(0.0));
          acc.offer(std::abs(v) * std::pow(xbracket(x), e), t, x, cxd(0.0));
        }
      acc.finish(coeffs.C, rep);
    }
  }

  return rep;
}

VecC composed_coefficient(const Grid& g, const CoefficientSet& coeffs, int j, const VecC& u,
                          double t) {
  require(j >= 0 && j < coeffs.p, "composed_coefficient: j out of range");
  require(u.size() == g.size(), "composed_coefficient: field/grid mismatch");
  VecC out(g.size());
  for (int i = 0; i < g.size(); ++i) out[i] = coeffs.a[j](t, g.node(i), u[i]);
  return out;
}

DecayReport check_composed_bounds(const Grid& g, const CoefficientSet& coeffs, const VecC& u,
                                  int beta_max, double t, std::optional<double> threshold) {
  DecayReport rep;
  double thr = threshold.value_or(std::numeric_limits<double>::infinity());
  VecR gamma_u(g.size());
  for (int i = 0; i < g.size(); ++i) gamma_u[i] = coeffs.gamma(u[i]);

  for (int j = 1; j <= coeffs.p - 1; ++j) {
    VecC comp = composed_coefficient(g, coeffs, j, u, t);
    for (int beta = 0; beta <= beta_max; ++beta) {
      double fac = (beta == 0) ? 1.0 : 1.0 + std::pow(g.sobolev_norm(u, 1.0 + beta, 1.0), beta);
      VecC d = g.derivative(comp, beta);
      double e = static_cast<double>(j - beta / 2) / (coeffs.p - 1);

      Accumulator acc_re, acc_im;
      acc_re.res.name = "comp_re(j=" + std::to_string(j) + ",b=" + std::to_string(beta) + ")";
      acc_im.res.name = "comp_im(j=" + std::to_string(j) + ",b=" + std::to_string(beta) + ")";
      acc_re.res.j = acc_im.res.j = j;
      acc_re.res.beta = acc_im.res.beta = beta;
      for (int i = 0; i < g.size(); ++i) {
        double x = g.node(i);
        acc_re.offer(std::abs(d[i].real()) / (gamma_u[i] * fac), t, x, u[i]);
        acc_im.offer(std::abs(d[i].imag()) * std::pow(xbracket(x), e) / (gamma_u[i] * fac), t, x, u[i]);
      }
      acc_re.finish(thr, rep);
      acc_im.finish(thr, rep);
    }
  }
  return rep;
}

namespace {

cxd sample_field_at(double L, int n, const VecC& f, double x) {
  double dx = 2.0 * L / n;
  double pos = (x + L) / dx;
  double fl = std::floor(pos);
  int j = static_cast<int>(fl);
  double frac = pos - fl;
  int j0 = ((j % n) + n) % n;
  if (frac < 1e-9) return f[j0];
  int j1 = (j0 + 1) % n;
  return (1.0 - frac) * f[j0] + frac * f[j1];
}

}  // namespace

CoefficientSet linearized_coefficients(const Grid& g, const CoefficientSet& coeffs,
                                       std::shared_ptr<const Trajectory> u) {
  require(u && !u->empty(), "linearized_coefficients: need a frozen trajectory");
  CoefficientSet lin = coeffs;

  // precompute D_x^h u and d_w a_h(t,x,u) along the trajectory
  auto dtraj = std::make_shared<std::vector<Trajectory>>();
  dtraj->resize(coeffs.p);
  for (int h = 0; h < coeffs.p; ++h) {
    (*dtraj)[h].times = u->times;
    for (const auto& fr : u->frames) (*dtraj)[h].frames.push_back(g.derivative(fr, h));
  }
  const double L = g.half_length();
  const int n = g.size();
  CoeffFn a0 = coeffs.a[0];
  CoefficientSet base = coeffs;

  lin.a[0] = [a0, base, dtraj, u, L, n](double t, double x, cxd w) -> cxd {
    cxd acc = a0(t, x, w);
    VecC uf = u->at(t);
    cxd uval = sample_field_at(L, n, uf, x);
    for (int h = 0; h < base.p; ++h) {
      cxd dh = sample_field_at(L, n, (*dtraj)[h].at(t), x);
      acc += base.eval_dw(h, t, x, uval) * dh;
    }
    return acc;
  };
  // the appended term is w-independent, so d_w a~_0 = d_w a_0 stays valid
  return lin;
}

}  // namespace pevo
