#pragma once

#include <cmath>

#include "pevo/util.hpp"

namespace pevo {

/// C-infinity glue g(t) = exp(-1/t) for t > 0, else 0.
inline double exp_glue(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// Smooth monotone step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = exp_glue(t), b = exp_glue(1.0 - t);
  return a / (a + b);
}

/// The excision/localization pair of the lambda symbols.
/// omega vanishes on |y| <= 1, equals |y|^{p-1}/y^{p-1} on |y| >= 2
/// (1 for odd p, sign(y) for even p), with a smooth join in between.
/// psi is 1 on |y| <= 1/2, 0 on |y| >= 1, monotone in |y|.
struct CutoffPair {
  int p = 2;

  double omega(double y) const {
    double a = std::abs(y);
    if (a <= 1.0) return 0.0;
    double far = (p % 2 == 1) ? 1.0 : (y > 0.0 ? 1.0 : -1.0);
    return far * smooth_step01(a - 1.0);
  }

  double psi(double y) const {
    double a = std::abs(y);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return 1.0 - smooth_step01(2.0 * (a - 0.5));
  }
};

/// Time localization of the mollified target: 0 for s <= 1, 1 for s >= 2.
inline double rho_time(double s) { return smooth_step01(s - 1.0); }

}  // namespace pevo
