#include "pevo/trajectory.hpp"

#include <algorithm>

namespace pevo {

double Trajectory::dt() const {
  require(size() >= 2, "Trajectory: need at least two frames");
  double d = times[1] - times[0];
  require(is_uniform(), "Trajectory: time grid must be uniform");
  return d;
}

bool Trajectory::is_uniform() const {
  if (size() < 2) return true;
  double d = times[1] - times[0];
  for (int i = 1; i + 1 < size(); ++i)
    if (std::abs(times[i + 1] - times[i] - d) > 1e-10 * std::max(1.0, std::abs(d))) return false;
  return d > 0.0;
}

VecC Trajectory::at(double t) const {
  require(!empty(), "Trajectory: empty");
  if (t <= times.front()) return frames.front();
  if (t >= times.back()) return frames.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int i = static_cast<int>(it - times.begin()) - 1;
  double w = (t - times[i]) / (times[i + 1] - times[i]);
  return (1.0 - w) * frames[i] + w * frames[i + 1];
}

VecC Trajectory::at_cubic(double t) const {
  require(!empty(), "Trajectory: empty");
  const int m = size();
  if (m < 4) return at(t);
  if (t <= times.front()) return frames.front();
  if (t >= times.back()) return frames.back();
  double d = dt();
  int i = static_cast<int>(std::floor((t - times[0]) / d));
  int w0 = std::clamp(i - 1, 0, m - 4);
  VecC acc = VecC::Zero(frames[0].size());
  for (int l = 0; l < 4; ++l) {
    double basis = 1.0;
    for (int r = 0; r < 4; ++r)
      if (r != l) basis *= (t - times[w0 + r]) / (times[w0 + l] - times[w0 + r]);
    acc += basis * frames[w0 + l];
  }
  return acc;
}

int Trajectory::index_of(double t) const {
  require(!empty(), "Trajectory: empty");
  auto it = std::lower_bound(times.begin(), times.end(), t);
  int i = static_cast<int>(it - times.begin());
  if (i > 0 && (i == size() || std::abs(times[i - 1] - t) < std::abs(times[i] - t))) --i;
  require(std::abs(times[i] - t) < 1e-9 * std::max(1.0, std::abs(t)) + 1e-12,
          "Trajectory: time not on the stored grid");
  return i;
}

Trajectory make_uniform_trajectory(double t_end, int steps, int n) {
  require(steps >= 1, "make_uniform_trajectory: steps >= 1");
  Trajectory tr;
  double d = t_end / steps;
  for (int m = 0; m <= steps; ++m) {
    tr.times.push_back(m * d);
    tr.frames.emplace_back(VecC::Zero(n));
  }
  return tr;
}

Trajectory time_derivative(const Trajectory& u) {
  const int m = u.size();
  require(m >= 2, "time_derivative: need at least two frames");
  double d = u.dt();
  Trajectory out;
  out.times = u.times;
  out.frames.resize(m);
  const int width = std::min(5, m);
  for (int i = 0; i < m; ++i) {
    int w0 = std::clamp(i - width / 2, 0, m - width);
    std::vector<double> xs(width);
    for (int q = 0; q < width; ++q) xs[q] = (w0 + q - i) * d;
    std::vector<double> wts = fd_weights(0.0, xs, 1);
    VecC acc = VecC::Zero(u.frames[0].size());
    for (int q = 0; q < width; ++q) acc += wts[q] * u.frames[w0 + q];
    out.frames[i] = acc;
  }
  return out;
}

Trajectory cumulative_time_integral(const Trajectory& u) {
  const int m = u.size();
  require(m >= 2, "cumulative_time_integral: need at least two frames");
  double d = u.dt();
  Trajectory out;
  out.times = u.times;
  out.frames.resize(m);
  out.frames[0] = VecC::Zero(u.frames[0].size());

  auto cell_weights = [&](int i) {
    // integrate the interpolant over [t_i, t_{i+1}] using 4 nearby frames
    int width = std::min(4, m);
    int w0 = std::clamp(i - 1, 0, m - width);
    std::vector<double> xs(width);
    for (int q = 0; q < width; ++q) xs[q] = (w0 + q) * d;
    double a = u.times[i] - u.times[0], b = u.times[i + 1] - u.times[0];
    // Gauss-Legendre 4 on [a,b] integrates the cubic Lagrange basis exactly
    static const double gn[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                 0.8611363115940526};
    static const double gw[4] = {0.3478548451374538, 0.6521451686402941, 0.6521451686402941,
                                 0.3478548451374538};
    std::vector<double> wts(width, 0.0);
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (int q = 0; q < 4; ++q) {
      double s = mid + hw * gn[q];
      for (int l = 0; l < width; ++l) {
        double basis = 1.0;
        for (int r = 0; r < width; ++r)
          if (r != l) basis *= (s - xs[r]) / (xs[l] - xs[r]);
        wts[l] += hw * gw[q] * basis;
      }
    }
    return std::pair<int, std::vector<double>>(w0, wts);
  };

  for (int i = 0; i + 1 < m; ++i) {
    auto [w0, wts] = cell_weights(i);
    VecC inc = VecC::Zero(u.frames[0].size());
    for (size_t q = 0; q < wts.size(); ++q) inc += wts[q] * u.frames[w0 + q];
    out.frames[i + 1] = out.frames[i] + inc;
  }
  return out;
}

double graded_seminorm(const Grid& g, const Trajectory& u, double n, double h) {
  Trajectory du = time_derivative(u);
  double sup = 0.0;
  for (int i = 0; i < u.size(); ++i)
    sup = std::max(sup, g.sobolev_norm(u.frames[i], n, h) + g.sobolev_norm(du.frames[i], n, h));
  return sup;
}

double sup_norm(const Grid& g, const Trajectory& u, double n, double h) {
  double sup = 0.0;
  for (int i = 0; i < u.size(); ++i) sup = std::max(sup, g.sobolev_norm(u.frames[i], n, h));
  return sup;
}

Trajectory axpy(const cxd& alpha, const Trajectory& x, const Trajectory& y) {
  require(x.size() == y.size(), "axpy: trajectory size mismatch");
  Trajectory out;
  out.times = x.times;
  out.frames.resize(x.size());
  for (int i = 0; i < x.size(); ++i) out.frames[i] = alpha * x.frames[i] + y.frames[i];
  return out;
}

Trajectory scale(const cxd& alpha, const Trajectory& x) {
  Trajectory out;
  out.times = x.times;
  out.frames.resize(x.size());
  for (int i = 0; i < x.size(); ++i) out.frames[i] = alpha * x.frames[i];
  return out;
}

}  // namespace pevo
