#include "pevo/grid.hpp"

#include <unsupported/Eigen/FFT>

namespace pevo {

namespace {
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}
}  // namespace

Grid::Grid(int n, double half_length) : n_(n), L_(half_length) {
  require(n > 0 && n % 2 == 0, "Grid: N must be a positive even integer");
  require(half_length > 0.0, "Grid: L must be positive");
  dx_ = 2.0 * L_ / n_;
  x_.resize(n_);
  xi_.resize(n_);
  for (int j = 0; j < n_; ++j) x_[j] = -L_ + j * dx_;
  for (int k = 0; k < n_; ++k) {
    int m = (k < n_ / 2) ? k : k - n_;
    xi_[k] = M_PI * m / L_;
  }
}

VecC Grid::forward(const VecC& u) const {
  require(u.size() == n_, "forward: field length mismatch");
  std::vector<cxd> in(u.data(), u.data() + n_), out(n_);
  fft_engine().fwd(out, in);
  VecC uhat(n_);
  const double coef = std::sqrt(2.0 * L_) / n_;
  for (int k = 0; k < n_; ++k) uhat[k] = out[k] * ((k & 1) ? -coef : coef);
  return uhat;
}

VecC Grid::inverse(const VecC& uhat) const {
  require(uhat.size() == n_, "inverse: spectrum length mismatch");
  std::vector<cxd> in(n_), out(n_);
  for (int k = 0; k < n_; ++k) in[k] = (k & 1) ? -uhat[k] : uhat[k];
  fft_engine().inv(out, in);
  VecC u(n_);
  const double coef = n_ / std::sqrt(2.0 * L_);
  for (int j = 0; j < n_; ++j) u[j] = out[j] * coef;
  return u;
}

VecR Grid::power_multiplier(int order) const {
  VecR m(n_);
  if (order == 0) {
    m.setOnes();
    return m;
  }
  for (int k = 0; k < n_; ++k) m[k] = std::pow(xi_[k], order);
  if (order % 2 == 1) m[nyquist_index()] = 0.0;
  return m;
}

VecC Grid::derivative(const VecC& u, int order) const {
  require(order >= 0, "derivative: order must be >= 0");
  if (order == 0) return u;
  VecC uhat = forward(u);
  VecR m = power_multiplier(order);
  for (int k = 0; k < n_; ++k) uhat[k] *= m[k];
  return inverse(uhat);
}

VecC Grid::apply_multiplier(const VecC& m, const VecC& u) const {
  VecC uhat = forward(u);
  uhat.array() *= m.array();
  return inverse(uhat);
}

double Grid::sobolev_norm(const VecC& u, double s, double h) const {
  VecC uhat = forward(u);
  double acc = 0.0;
  if (s == 0.0) {
    acc = uhat.squaredNorm();
  } else {
    for (int k = 0; k < n_; ++k) acc += std::pow(bracket(xi_[k], h), 2.0 * s) * std::norm(uhat[k]);
  }
  return std::sqrt(acc);
}

cxd Grid::inner(const VecC& u, const VecC& v) const {
  return (2.0 * L_ / n_) * (u.array() * v.array().conjugate()).sum();
}

void Grid::build_dense() const {
  synth_ = std::make_unique<MatC>(n_, n_);
  anal_ = std::make_unique<MatC>(n_, n_);
  const double sc = 1.0 / std::sqrt(2.0 * L_);
  const double fc = std::sqrt(2.0 * L_) / n_;
  for (int j = 0; j < n_; ++j)
    for (int k = 0; k < n_; ++k) {
      cxd e = std::exp(cxd(0.0, xi_[k] * x_[j]));
      (*synth_)(j, k) = sc * e;
      (*anal_)(k, j) = fc * std::conj(e);
    }
}

const MatC& Grid::synthesis_matrix() const {
  std::call_once(dense_once_, [this] { build_dense(); });
  return *synth_;
}

const MatC& Grid::analysis_matrix() const {
  std::call_once(dense_once_, [this] { build_dense(); });
  return *anal_;
}

VecR sobolev_weights(const Grid& g, double s, double h) {
  VecR w(g.size());
  for (int k = 0; k < g.size(); ++k) w[k] = std::pow(bracket(g.freq(k), h), s);
  return w;
}

}  // namespace pevo
