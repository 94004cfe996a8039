#include "pevo/tuning.hpp"

namespace pevo {

double defect_budget(const Grid& g, const CoefficientSet& coeffs, const VecC& u, double c0) {
  double gb = coeffs.gamma_sup(u);
  double q = 4.0 * coeffs.p - 3.0;
  double un = g.sobolev_norm(u, q, 1.0);
  return c0 * (1.0 + gb) * (1.0 + std::pow(un, q));
}

double paper_floor_level1(const Grid& g, const CoefficientSet& coeffs, const VecC& u, double t) {
  const int p = coeffs.p;
  double sup = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    double x = g.node(j);
    sup = std::max(sup, xbracket(x) * std::abs(coeffs.a[p - 1](t, x, u[j]).imag()));
  }
  double denom = std::pow(2.0, p - 2) / std::pow(std::sqrt(5.0), p - 1) * p * coeffs.C_p;
  return sup / denom;
}

TransformPack tune_constants(const Grid& g, const CoefficientSet& coeffs, const VecC& u_frozen,
                             const CutoffPair& cut, const TuneOptions& opts, TuneReport* report) {
  const int p = coeffs.p;
  require(cut.p == p, "tune_constants: cutoff pair built for a different p");
  TuneReport rep;
  rep.budget = defect_budget(g, coeffs, u_frozen, opts.budget_c0);
  rep.gamma_bar = coeffs.gamma_sup(u_frozen);
  {
    double q = 4.0 * p - 3.0;
    rep.u_norm_pow = std::pow(g.sobolev_norm(u_frozen, q, 1.0), q);
  }
  FrozenState frozen(u_frozen);
  const double t0 = opts.t_sample;

  std::vector<double> M(p - 1, 0.0);
  double h = std::max(1.0, opts.h_init);
  double floor1 = paper_floor_level1(g, coeffs, u_frozen, t0);

  auto defect_at = [&](const std::vector<double>& Mv, double hv, int klevel) {
    TransformPack pack = build_pack(g, p, Mv, hv, cut, opts.neumann_order, false);
    MatC A = assemble_generator_matrix(g, coeffs, frozen, t0, p - klevel);
    MatC B = pack.elu.solve(A * pack.E);
    if (!B.allFinite()) return -std::numeric_limits<double>::infinity();
    return garding_defect(g, B, 0.0, hv);
  };

  // raise h until the (truncated) Neumann series certifies; the defect
  // measurements below are meaningless on an uncertified calculus
  auto certify_h = [&](const std::vector<double>& Mv) {
    double nn;
    for (;;) {
      TransformPack pack = build_pack(g, p, Mv, h, cut, opts.neumann_order, false);
      nn = pack.neumann_norm;
      if (nn <= opts.neumann_target) break;
      h *= 2.0;
      if (h > opts.h_cap) {
        rep.failure = "tuning failure: h exceeded cap without Neumann certification";
        if (report) *report = rep;
        throw std::runtime_error(rep.failure);
      }
    }
    return nn;
  };

  rep.levels.resize(p - 1);
  for (int outer = 0; outer < 4; ++outer) {
    bool moved = false;
    for (int k = 1; k <= p - 1; ++k) {
      TuneLevelInfo& info = rep.levels[k - 1];
      info.k = k;
      info.paper_floor = (k == 1) ? floor1 : 0.0;
      double Mk = std::max({M[k - 1], opts.M_init, (k == 1) ? floor1 : 0.0});
      double best_defect = -std::numeric_limits<double>::infinity();
      double best_M = Mk;
      while (true) {
        M[k - 1] = Mk;
        rep.neumann_norm = certify_h(M);  // doubling M can break the series
        double defect = defect_at(M, h, k);
        info.M = Mk;
        info.defect = defect;
        if (defect >= -opts.tune_margin * rep.budget) break;
        if (defect <= best_defect) {
          // the circle penalty of the transform grows with M; once doubling
          // stops helping the level cannot be certified within this budget
          rep.failure = "tuning failure at level p-" + std::to_string(k) +
                        ": defect stalled at " + std::to_string(best_defect) + " (M = " +
                        std::to_string(best_M) + ") against budget -" + std::to_string(rep.budget);
          if (report) *report = rep;
          throw std::runtime_error(rep.failure);
        }
        best_defect = defect;
        best_M = Mk;
        Mk *= 2.0;
        ++info.doublings;
        moved = true;
        if (Mk > opts.M_cap) {
          rep.failure = "tuning failure at level p-" + std::to_string(k) + ": M exceeded cap " +
                        std::to_string(opts.M_cap) + " with defect " + std::to_string(defect);
          if (report) *report = rep;
          throw std::runtime_error(rep.failure);
        }
      }
    }
    // h >= max(M_{p-2},...,M_1), then re-certify the series
    for (int k = 2; k <= p - 1; ++k)
      if (h < M[k - 1]) {
        h = M[k - 1];
        moved = true;
      }
    {
      double h_before = h;
      rep.neumann_norm = certify_h(M);
      moved |= h != h_before;
    }
    rep.h = h;
    if (!moved) break;
  }

  rep.final_defect = defect_at(M, h, p - 1);
  if (rep.final_defect < -rep.budget) {
    rep.failure = "tuning failure: final defect " + std::to_string(rep.final_defect) +
                  " below budget -" + std::to_string(rep.budget);
    if (report) *report = rep;
    throw std::runtime_error(rep.failure);
  }

  rep.success = true;
  if (report) *report = rep;
  return build_pack(g, p, M, h, cut, opts.neumann_order, true);
}

}  // namespace pevo
