#pragma once

#include <functional>

#include "pevo/grid.hpp"

namespace pevo {

/// Sampled symbol A(x_j, xi_k): rows follow the grid nodes, columns the
/// frequency lattice in FFT storage order. Quantization is left
/// (Kohn-Nirenberg): (Au)(x) = (2L)^{-1/2} sum_k A(x, xi_k) uhat_k e^{i xi_k x}.
struct Symbol {
  MatC samples;        // N x N
  double order = 0.0;  // declared class S^order
  double h = 1.0;

  static Symbol from_function(const Grid& g, const std::function<cxd(double x, double xi)>& f,
                              double order, double h = 1.0);
  static Symbol multiplier(const Grid& g, const VecC& m_of_xi, double order, double h = 1.0);
  static Symbol coefficient(const Grid& g, const VecC& c_of_x, double h = 1.0);
};

VecC quantize_apply(const Grid& g, const Symbol& a, const VecC& u);
MatC to_matrix(const Grid& g, const Symbol& a);

/// Estimated symbol-class constants C_{alpha,beta} =
/// sup |d_xi^alpha D_x^beta a| / <xi>_h^{m-alpha} over interior samples.
struct OrderTable {
  Eigen::MatrixXd C;  // (alpha_max+1) x (beta_max+1)
  double max() const { return C.maxCoeff(); }
};

struct OrderCheckOptions {
  bool spectral_x = false;   // symbol smooth-periodic in x
  double x_interior = 0.9;   // sup restricted to |x| <= x_interior * L
};

OrderTable verify_symbol_order(const Grid& g, const Symbol& a, int alpha_max, int beta_max,
                               const OrderCheckOptions& opts = {});

/// Minimum eigenvalue of W^{-1/2} sym(A) W^{-1/2} where sym(A) is the
/// Hermitian part of A w.r.t. the L2 inner product and W the diagonal
/// quadratic form of the H^{order_shift} norm. c* >= -c certifies the
/// discrete lower bound Re<Au,u> >= -c ||u||_{order_shift}^2.
double garding_defect(const Grid& g, const MatC& A, double order_shift, double h = 1.0);

void write_matrix_csv(const MatC& m, const std::string& path);

}  // namespace pevo
