#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pevo {

using cxd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;

/// Regularized modulus sqrt(h^2 + xi^2), the symbol-class weight.
inline double bracket(double xi, double h) {
  if (h < 1.0) throw std::invalid_argument("bracket: requires h >= 1, got h=" + std::to_string(h));
  return std::hypot(h, xi);
}

/// <x> = sqrt(1 + x^2).
inline double xbracket(double x) { return std::hypot(1.0, x); }

struct SolverInstability : std::runtime_error {
  double t_fail;
  explicit SolverInstability(double t)
      : std::runtime_error("time integration blew up at t=" + std::to_string(t)), t_fail(t) {}
};

/// Deterministic RNG. Gaussian draws go through Box-Muller on explicit
/// 53-bit uniforms so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  double uniform() {  // in [0,1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  cxd cgaussian() { return {gaussian(), gaussian()}; }

 private:
  std::uint64_t state_;
  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

/// Fornberg weights for the d-th derivative at point z from samples at x.
/// Returns w with deriv ~= sum_i w[i] f(x[i]).
inline std::vector<double> fd_weights(double z, const std::vector<double>& x, int d) {
  const int n = static_cast<int>(x.size());
  if (n < d + 1) throw std::invalid_argument("fd_weights: stencil too small for derivative order");
  std::vector<std::vector<double>> c(n, std::vector<double>(d + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, d);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][d];
  return w;
}

/// Centered finite-difference weights, 4th order accurate, for the d-th
/// derivative on a uniform stencil of spacing hstep. Returns offsets+weights.
struct FdStencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

inline FdStencil central_fd(int d, double hstep) {
  // width: smallest symmetric stencil with accuracy >= 4
  int half = (d + 1) / 2 + 1;  // npoints = 2*half+1 >= d+4 for even d, d+3 odd -> acc 4
  while (2 * half + 1 < d + 4) ++half;
  FdStencil s;
  std::vector<double> x;
  for (int o = -half; o <= half; ++o) {
    s.offsets.push_back(o);
    x.push_back(o * hstep);
  }
  s.weights = fd_weights(0.0, x, d);
  return s;
}

/// Least-squares fit of y ~= a + b x; returns {a, b}.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("linear_fit: need at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) return {sy / n, 0.0};
  double b = (n * sxy - sx * sy) / det;
  double a = (sy - b * sx) / n;
  return {a, b};
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace pevo
