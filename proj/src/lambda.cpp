#include "pevo/lambda.hpp"

namespace pevo {

namespace {

constexpr double kGlNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};

// int_a^b <y>^{-s} psi(<y>/cap) dy
double cell_integral(double a, double b, double s, double cap, const CutoffPair& cut) {
  double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  double acc = 0.0;
  for (int q = 0; q < 8; ++q) {
    double y = mid + hw * kGlNodes[q];
    double br = xbracket(y);
    acc += kGlWeights[q] * std::pow(br, -s) * cut.psi(br / cap);
  }
  return hw * acc;
}

}  // namespace

Symbol build_lambda(const Grid& g, int p, int k, double M, double h, const CutoffPair& cut,
                    bool verify_quadrature, bool periodic) {
  require(p >= 2, "build_lambda: p >= 2");
  require(k >= 1 && k <= p - 1, "build_lambda: 1 <= k <= p-1");
  require(M >= 0.0, "build_lambda: M >= 0");
  require(h >= 1.0, "build_lambda: h >= 1");
  require(cut.p == p, "build_lambda: cutoff pair built for a different p");

  const int n = g.size();
  Symbol lam;
  lam.order = 0.0;  // log-order; declared 0 with constants carrying the log
  lam.h = h;
  lam.samples = MatC::Zero(n, n);
  if (M == 0.0) return lam;

  const double s = static_cast<double>(p - k) / (p - 1);
  const double L = g.half_length();
  const int j0 = n / 2;  // node at x = 0

  for (int kc = 0; kc < n; ++kc) {
    const double xi = g.freq(kc);
    const double w = cut.omega(xi / h);
    if (w == 0.0) continue;
    const double brxi = bracket(xi, h);
    const double cap = std::pow(brxi, p - 1);
    const double tail = M * w * std::pow(brxi, 1 - k);

    VecR I = VecR::Zero(n);
    double worst_dev = 0.0;
    auto cell = [&](double a, double b) {
      double v = cell_integral(a, b, s, cap, cut);
      if (verify_quadrature) {
        double m = 0.5 * (a + b);
        double v2 = cell_integral(a, m, s, cap, cut) + cell_integral(m, b, s, cap, cut);
        worst_dev = std::max(worst_dev, std::abs(v - v2));
        v = v2;
      }
      return v;
    };
    for (int j = j0; j + 1 < n; ++j) I[j + 1] = I[j] + cell(g.node(j), g.node(j + 1));
    for (int j = j0; j > 0; --j) I[j - 1] = I[j] - cell(g.node(j - 1), g.node(j));
    if (verify_quadrature && worst_dev > 1e-9 * (1.0 + I.cwiseAbs().maxCoeff()))
      throw std::runtime_error("build_lambda: x-quadrature did not converge under refinement");

    double qbar = 0.0;
    if (periodic) {
      // mean of the integrand over the period, including the wrap cell
      double mass = I[n - 1] - I[0] + cell(g.node(n - 1), L);
      qbar = mass / (2.0 * L);
    }
    for (int j = 0; j < n; ++j) lam.samples(j, kc) = tail * (I[j] - qbar * g.node(j));
  }
  return lam;
}

TransformPack build_pack(const Grid& g, int p, std::vector<double> M, double h,
                         const CutoffPair& cut, int neumann_order, bool verify_quadrature) {
  require(static_cast<int>(M.size()) == p - 1, "build_pack: need p-1 constants M_{p-1}..M_1");
  require(neumann_order >= 0, "build_pack: neumann_order >= 0");
  const int n = g.size();

  TransformPack pack;
  pack.p = p;
  pack.M = std::move(M);
  pack.h = h;
  pack.neumann_order = neumann_order;

  pack.Lambda.order = 0.0;
  pack.Lambda.h = h;
  pack.Lambda.samples = MatC::Zero(n, n);
  for (int k = 1; k <= p - 1; ++k) {
    Symbol lam = build_lambda(g, p, k, pack.M[k - 1], h, cut, verify_quadrature);
    pack.Lambda.samples += lam.samples;
    pack.lambdas.push_back(std::move(lam));
  }

  double lam_max = pack.Lambda.samples.cwiseAbs().maxCoeff();
  if (lam_max > 700.0)
    throw std::invalid_argument("build_pack: e^Lambda overflows (|Lambda| up to " +
                                std::to_string(lam_max) + "); increase h or decrease M");

  pack.expLambda.h = pack.expNegLambda.h = h;
  pack.expLambda.samples = pack.Lambda.samples.array().exp();
  pack.expNegLambda.samples = (-pack.Lambda.samples.array()).exp();

  // fitted log-growth (7): sup_x |Lambda| <= C + delta log<xi>_h on active columns
  {
    std::vector<double> xs, ys;
    for (int kc = 0; kc < n; ++kc) {
      if (std::abs(g.freq(kc)) <= h) continue;  // omega excision: column is zero
      xs.push_back(std::log(bracket(g.freq(kc), h)));
      ys.push_back(pack.Lambda.samples.col(kc).cwiseAbs().maxCoeff());
    }
    if (xs.size() >= 2) {
      auto [c0, slope] = linear_fit(xs, ys);
      pack.delta = std::max(0.0, slope);
      double c = c0;
      for (size_t i = 0; i < xs.size(); ++i) c = std::max(c, ys[i] - pack.delta * xs[i]);
      pack.C_fit = c;
    }
  }
  pack.expLambda.order = pack.delta;
  pack.expNegLambda.order = pack.delta;

  pack.E = to_matrix(g, pack.expLambda);
  pack.Eneg = to_matrix(g, pack.expNegLambda);
  pack.r = MatC::Identity(n, n) - pack.Eneg * pack.E;
  pack.has_dense = true;
  pack.neumann_norm = estimate_neumann_norm(pack);

  MatC S = MatC::Identity(n, n);
  for (int i = 0; i < neumann_order; ++i) S = MatC::Identity(n, n) + pack.r * S;
  pack.inv_neumann = S * pack.Eneg;
  pack.elu.compute(pack.E);
  return pack;
}

VecC apply_exp_lambda(const TransformPack& pack, const VecC& u) { return pack.E * u; }
VecC apply_exp_neg_lambda(const TransformPack& pack, const VecC& u) { return pack.Eneg * u; }

VecC invert_exp_lambda(const TransformPack& pack, const VecC& u, bool dense_exact) {
  require(pack.has_dense, "invert_exp_lambda: pack built without dense operators");
  if (dense_exact) return pack.elu.solve(u);
  if (pack.neumann_norm >= 1.0)
    throw std::invalid_argument("invert_exp_lambda: Neumann series diverges (||r|| = " +
                                std::to_string(pack.neumann_norm) + " >= 1); increase h");
  return pack.inv_neumann * u;
}

double estimate_neumann_norm(const TransformPack& pack) {
  require(pack.has_dense, "estimate_neumann_norm: pack built without dense operators");
  const MatC& r = pack.r;
  const int n = static_cast<int>(r.rows());
  if (r.norm() < 1e-14) return 0.0;
  Rng rng(0x5eed);
  VecC x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.cgaussian();
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < 200; ++it) {
    VecC y = r.adjoint() * (r * x);
    double nl = std::real(x.dot(y));
    double ny = y.norm();
    if (ny < 1e-300) return 0.0;
    x = y / ny;
    if (it > 4 && std::abs(nl - lam) < 1e-12 * std::max(1.0, std::abs(nl))) {
      lam = nl;
      break;
    }
    lam = nl;
  }
  return std::sqrt(std::max(0.0, lam));
}

double lambda_p1_bound_violation(const Grid& g, const TransformPack& pack) {
  const int n = g.size();
  const Symbol& lam = pack.lambdas[0];
  const double M = pack.M[0];
  double worst = -std::numeric_limits<double>::infinity();
  for (int kc = 0; kc < n; ++kc) {
    double bound = M * std::log(2.0) + M * (pack.p - 1) * std::log(bracket(g.freq(kc), pack.h));
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(lam.samples(j, kc)) - bound);
  }
  return worst;
}

double lambda_k_bound_violation(const Grid& g, const TransformPack& pack, int k) {
  require(k >= 2 && k <= pack.p - 1, "lambda_k_bound_violation: 2 <= k <= p-1");
  const int n = g.size();
  const Symbol& lam = pack.lambdas[k - 1];
  const double M = pack.M[k - 1];
  const double ex = static_cast<double>(k - 1) / (pack.p - 1);
  double worst = -std::numeric_limits<double>::infinity();
  for (int kc = 0; kc < n; ++kc) {
    double brxi = bracket(g.freq(kc), pack.h);
    double cap = std::pow(brxi, pack.p - 1);
    double tail = std::pow(brxi, 1 - k);
    for (int j = 0; j < n; ++j) {
      double growth = std::pow(std::min(xbracket(g.node(j)), cap), ex);
      double bound = M * (pack.p - 1) / (k - 1) * growth * tail;
      worst = std::max(worst, std::abs(lam.samples(j, kc)) - bound);
    }
  }
  return worst;
}

OrderTable lambda_derivative_constants(const Grid& g, const TransformPack& pack, int alpha_max,
                                       int beta_max) {
  Symbol as_order0 = pack.Lambda;
  as_order0.order = 0.0;
  return verify_symbol_order(g, as_order0, alpha_max, beta_max);
}

namespace {

double exp_decay_constant(const Grid& g, const Symbol& expl, double h, int d, bool in_xi) {
  // FD of e^{pm Lambda} along one axis, weighted by the claimed decay and
  // normalized by e^{pm Lambda} itself.
  const int n = g.size();
  FdStencil st = central_fd(d, in_xi ? g.dxi() : g.dx());
  const int half = static_cast<int>(st.offsets.size()) / 2;
  double sup = 0.0;
  if (in_xi) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = (i + n / 2) % n;
    for (int j = 0; j < n; ++j) {
      if (std::abs(g.node(j)) > 0.9 * g.half_length()) continue;
      for (int c = half; c < n - half; ++c) {
        cxd acc = 0.0;
        for (size_t q = 0; q < st.offsets.size(); ++q)
          acc += st.weights[q] * expl.samples(j, perm[c + st.offsets[q]]);
        double xi = g.freq(perm[c]);
        double ref = std::abs(expl.samples(j, perm[c]));
        sup = std::max(sup, std::abs(acc) * std::pow(bracket(xi, h), d) / ref);
      }
    }
  } else {
    for (int j = half; j < n - half; ++j) {
      if (std::abs(g.node(j)) > 0.9 * g.half_length()) continue;
      for (int c = 0; c < n; ++c) {
        cxd acc = 0.0;
        for (size_t q = 0; q < st.offsets.size(); ++q)
          acc += st.weights[q] * expl.samples(j + st.offsets[q], c);
        double ref = std::abs(expl.samples(j, c));
        sup = std::max(sup, std::abs(acc) * std::pow(xbracket(g.node(j)), d) / ref);
      }
    }
  }
  return sup;
}

}  // namespace

double exp_lambda_xi_decay_constant(const Grid& g, const TransformPack& pack, int alpha, int sign) {
  return exp_decay_constant(g, sign >= 0 ? pack.expLambda : pack.expNegLambda, pack.h, alpha, true);
}

double exp_lambda_x_decay_constant(const Grid& g, const TransformPack& pack, int beta, int sign) {
  return exp_decay_constant(g, sign >= 0 ? pack.expLambda : pack.expNegLambda, pack.h, beta, false);
}

}  // namespace pevo
