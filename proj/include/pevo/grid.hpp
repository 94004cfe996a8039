#pragma once

#include <memory>
#include <mutex>

#include "pevo/util.hpp"

namespace pevo {

/// Periodic grid on [-L, L) with N equispaced nodes and the dual frequency
/// lattice xi_k = (pi/L) k, k = -N/2 .. N/2-1, held in FFT storage order
/// (0, 1, ..., N/2-1, -N/2, ..., -1).
///
/// Transform convention: uhat_k = (sqrt(2L)/N) sum_j u_j e^{-i xi_k x_j},
/// so that sum_k |uhat_k|^2 equals the quadrature L2 norm (2L/N) sum_j |u_j|^2
/// and a single mode e^{i xi x} has |uhat| = sqrt(2L).
class Grid {
 public:
  Grid(int n, double half_length);

  int size() const { return n_; }
  double half_length() const { return L_; }
  double dx() const { return dx_; }
  double dxi() const { return M_PI / L_; }
  double node(int j) const { return x_[j]; }
  double freq(int k) const { return xi_[k]; }
  const VecR& nodes() const { return x_; }
  const VecR& freqs() const { return xi_; }
  int nyquist_index() const { return n_ / 2; }
  double max_freq() const { return M_PI * n_ / (2.0 * L_); }

  VecC forward(const VecC& u) const;
  VecC inverse(const VecC& uhat) const;

  /// D_x^order via the exact multiplier xi^order; for odd order the Nyquist
  /// mode is zeroed so real fields stay conjugate-symmetric.
  VecC derivative(const VecC& u, int order) const;

  /// xi^order with the odd-order Nyquist rule applied.
  VecR power_multiplier(int order) const;

  /// Apply a diagonal frequency multiplier m(xi).
  VecC apply_multiplier(const VecC& m, const VecC& u) const;

  double sobolev_norm(const VecC& u, double s, double h) const;
  double l2_norm(const VecC& u) const { return sobolev_norm(u, 0.0, 1.0); }

  /// L2 inner product <u,v> = (2L/N) sum_j u_j conj(v_j).
  cxd inner(const VecC& u, const VecC& v) const;

  /// Dense synthesis matrix S_{jk} = e^{i xi_k x_j}/sqrt(2L): u = S uhat.
  const MatC& synthesis_matrix() const;
  /// Dense analysis matrix F with uhat = F u (inverse of synthesis).
  const MatC& analysis_matrix() const;

 private:
  int n_;
  double L_, dx_;
  VecR x_, xi_;
  mutable std::once_flag dense_once_;
  mutable std::unique_ptr<MatC> synth_, anal_;
  void build_dense() const;
};

/// Weighted-norm witness: per-frequency weights <xi_k>_h^s.
VecR sobolev_weights(const Grid& g, double s, double h);

}  // namespace pevo
