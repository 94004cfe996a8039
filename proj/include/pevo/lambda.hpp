#pragma once

#include <Eigen/LU>
#include <vector>

#include "pevo/cutoffs.hpp"
#include "pevo/symbol.hpp"

namespace pevo {

/// lambda_{p-k}(x,xi) = M omega(xi/h) int_0^x <y>^{-(p-k)/(p-1)}
///                      psi(<y>/<xi>_h^{p-1}) dy <xi>_h^{-k+1}.
/// The x-integral is cumulative 8-point Gauss-Legendre from 0; columns with
/// |xi| <= h are exactly zero (omega excision). verify_quadrature re-integrates
/// each cell split in two and raises on disagreement.
///
/// With `periodic` (the default, used for every operator realization) the
/// integrand is recentered by its x-mean over the box, which closes the
/// primitive into a smooth periodic function: the whole-line lambda is odd
/// with nonzero limits, and its raw periodization would put an O(log<xi>)
/// jump at the wrap that destroys the discrete composition calculus. The
/// recentered primitive is pointwise no larger, so the growth bounds are
/// unchanged; the price is a uniform stabilization offset of size
/// mean(q) = O(log(L)/L) per level, which vanishes with the box size.
Symbol build_lambda(const Grid& g, int p, int k, double M, double h, const CutoffPair& cut,
                    bool verify_quadrature = true, bool periodic = true);

/// The change of variable v = e^{Lambda(x,D)} w and its certified inverse.
struct TransformPack {
  int p = 2;
  std::vector<double> M;  // M[k-1] = M_{p-k}, k = 1..p-1
  double h = 1.0;
  int neumann_order = 8;

  std::vector<Symbol> lambdas;
  Symbol Lambda, expLambda, expNegLambda;

  double delta = 0.0;  // fitted order of e^Lambda: sup_x|Lambda| <= C + delta log<xi>_h
  double C_fit = 0.0;
  double sigma() const { return 2.0 * delta; }  // loss of derivatives

  double neumann_norm = 0.0;  // operator norm of r = I - op(e^-L) op(e^L)
  MatC E, Eneg, r;
  MatC inv_neumann;  // (I + r + ... + r^n) Eneg
  Eigen::PartialPivLU<MatC> elu;
  bool has_dense = false;

  double neumann_tail() const {
    double q = neumann_norm;
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    return std::pow(q, neumann_order + 1) / (1.0 - q);
  }
  bool certified() const { return has_dense && neumann_norm < 1.0; }
};

TransformPack build_pack(const Grid& g, int p, std::vector<double> M, double h,
                         const CutoffPair& cut, int neumann_order = 8,
                         bool verify_quadrature = true);

VecC apply_exp_lambda(const TransformPack& pack, const VecC& u);
VecC apply_exp_neg_lambda(const TransformPack& pack, const VecC& u);

/// Truncated-Neumann inverse of e^Lambda (or the dense solve when
/// dense_exact). Requires certification unless dense_exact.
VecC invert_exp_lambda(const TransformPack& pack, const VecC& u, bool dense_exact = false);

/// Discrete operator norm of r by power iteration; < 1 certifies h.
double estimate_neumann_norm(const TransformPack& pack);

/// Largest violation of |lambda_{p-1}| <= M(log 2 + (p-1) log<xi>_h)
/// over all samples (<= 0 up to tolerance when the bound holds).
double lambda_p1_bound_violation(const Grid& g, const TransformPack& pack);

/// Largest violation of the k >= 2 bound
/// |lambda_{p-k}| <= M (p-1)/(k-1) <x>^{(k-1)/(p-1)} <xi>_h^{-k+1},
/// with the <x>-growth capped at the boundary of E = {<x> <= <xi>_h^{p-1}}
/// (the characteristic-function weight of the inequality).
double lambda_k_bound_violation(const Grid& g, const TransformPack& pack, int k);

/// Fitted constants delta_{alpha,beta} = sup |d_xi^alpha D_x^beta Lambda| <xi>_h^alpha.
OrderTable lambda_derivative_constants(const Grid& g, const TransformPack& pack, int alpha_max,
                                       int beta_max);

/// Fitted C in |d_xi^alpha e^{pm Lambda}| <= C <xi>_h^{-alpha} e^{pm Lambda}.
double exp_lambda_xi_decay_constant(const Grid& g, const TransformPack& pack, int alpha, int sign);
/// Fitted C in |D_x^beta e^{pm Lambda}| <= C <x>^{-beta} e^{pm Lambda} (grid interior).
double exp_lambda_x_decay_constant(const Grid& g, const TransformPack& pack, int beta, int sign);

}  // namespace pevo
