#include "pevo/symbol.hpp"

#include <fstream>

namespace pevo {

Symbol Symbol::from_function(const Grid& g, const std::function<cxd(double, double)>& f,
                             double order, double h) {
  Symbol a;
  a.order = order;
  a.h = h;
  a.samples.resize(g.size(), g.size());
  for (int j = 0; j < g.size(); ++j)
    for (int k = 0; k < g.size(); ++k) a.samples(j, k) = f(g.node(j), g.freq(k));
  return a;
}

Symbol Symbol::multiplier(const Grid& g, const VecC& m, double order, double h) {
  require(m.size() == g.size(), "multiplier symbol: length mismatch");
  Symbol a;
  a.order = order;
  a.h = h;
  a.samples = MatC::Ones(g.size(), 1) * m.transpose();
  return a;
}

Symbol Symbol::coefficient(const Grid& g, const VecC& c, double h) {
  require(c.size() == g.size(), "coefficient symbol: length mismatch");
  Symbol a;
  a.order = 0.0;
  a.h = h;
  a.samples = c * Eigen::RowVectorXcd::Ones(g.size());
  return a;
}

VecC quantize_apply(const Grid& g, const Symbol& a, const VecC& u) {
  require(a.samples.rows() == g.size() && a.samples.cols() == g.size(),
          "quantize_apply: symbol/grid mismatch");
  require(u.size() == g.size(), "quantize_apply: field/grid mismatch");
  VecC uhat = g.forward(u);
  const MatC& S = g.synthesis_matrix();
  return (a.samples.array() * S.array()).matrix() * uhat;
}

MatC to_matrix(const Grid& g, const Symbol& a) {
  const MatC& S = g.synthesis_matrix();
  const MatC& F = g.analysis_matrix();
  return (a.samples.array() * S.array()).matrix() * F;
}

namespace {

// 4th-order centered FD along a column-index direction without wraparound;
// marks entries where the stencil does not fit as invalid (NaN).
MatC fd_axis(const MatC& m, int deriv, double step, bool along_rows) {
  FdStencil st = central_fd(deriv, step);
  const int half = static_cast<int>(st.offsets.size()) / 2;
  const int R = static_cast<int>(m.rows()), C = static_cast<int>(m.cols());
  MatC out = MatC::Constant(R, C, cxd(std::nan(""), 0.0));
  if (along_rows) {  // derivative in the row index (x)
    for (int i = half; i < R - half; ++i)
      for (int j = 0; j < C; ++j) {
        cxd acc = 0.0;
        for (size_t s = 0; s < st.offsets.size(); ++s) acc += st.weights[s] * m(i + st.offsets[s], j);
        out(i, j) = acc;
      }
  } else {
    for (int i = 0; i < R; ++i)
      for (int j = half; j < C - half; ++j) {
        cxd acc = 0.0;
        for (size_t s = 0; s < st.offsets.size(); ++s) acc += st.weights[s] * m(i, j + st.offsets[s]);
        out(i, j) = acc;
      }
  }
  return out;
}

// spectral derivative in x of every column (periodic symbols only)
MatC spectral_x(const Grid& g, const MatC& m, int deriv) {
  MatC out(m.rows(), m.cols());
  for (int k = 0; k < m.cols(); ++k) out.col(k) = g.derivative(m.col(k), deriv);
  return out;
}

// reorder columns so xi is monotonically increasing; returns permutation
std::vector<int> sorted_freq_perm(const Grid& g) {
  std::vector<int> perm(g.size());
  const int n = g.size();
  for (int i = 0; i < n; ++i) perm[i] = (i + n / 2) % n;  // -N/2 ... N/2-1
  return perm;
}

}  // namespace

OrderTable verify_symbol_order(const Grid& g, const Symbol& a, int alpha_max, int beta_max,
                               const OrderCheckOptions& opts) {
  require(alpha_max <= 7 && beta_max <= 7, "verify_symbol_order: derivative orders capped at 7");
  const int n = g.size();
  {
    FdStencil worst = central_fd(std::max(alpha_max, 1), 1.0);
    if (static_cast<int>(worst.offsets.size()) + 2 * (alpha_max + beta_max) > n)
      throw std::runtime_error("verify_symbol_order: grid too coarse for requested derivatives");
  }

  // columns in monotone xi order so frequency FD never wraps the lattice
  std::vector<int> perm = sorted_freq_perm(g);
  MatC base(n, n);
  VecR xi_sorted(n);
  for (int c = 0; c < n; ++c) {
    base.col(c) = a.samples.col(perm[c]);
    xi_sorted[c] = g.freq(perm[c]);
  }

  OrderTable tab;
  tab.C.resize(alpha_max + 1, beta_max + 1);
  for (int beta = 0; beta <= beta_max; ++beta) {
    MatC mb;
    if (beta == 0)
      mb = base;
    else if (opts.spectral_x) {
      MatC tmp = spectral_x(g, a.samples, beta);
      mb.resize(n, n);
      for (int c = 0; c < n; ++c) mb.col(c) = tmp.col(perm[c]);
    } else {
      mb = fd_axis(base, beta, g.dx(), true);
    }
    for (int alpha = 0; alpha <= alpha_max; ++alpha) {
      MatC mab = (alpha == 0) ? mb : fd_axis(mb, alpha, g.dxi(), false);
      double sup = 0.0;
      for (int i = 0; i < n; ++i) {
        if (std::abs(g.node(i)) > opts.x_interior * g.half_length()) continue;
        for (int j = 0; j < n; ++j) {
          cxd v = mab(i, j);
          if (std::isnan(v.real())) continue;
          double w = std::pow(bracket(xi_sorted[j], a.h), a.order - alpha);
          sup = std::max(sup, std::abs(v) / w);
        }
      }
      tab.C(alpha, beta) = sup;
    }
  }
  return tab;
}

double garding_defect(const Grid& g, const MatC& A, double order_shift, double h) {
  const int n = g.size();
  require(A.rows() == n && A.cols() == n, "garding_defect: matrix/grid mismatch");
  MatC H = 0.5 * (A + A.adjoint());
  // unitary DFT basis: U = sqrt(N/2L) * analysis matrix
  MatC U = std::sqrt(n / (2.0 * g.half_length())) * g.analysis_matrix();
  MatC Hf = U * H * U.adjoint();
  VecR winv(n);
  for (int k = 0; k < n; ++k) winv[k] = std::pow(bracket(g.freq(k), h), -order_shift);
  MatC B = winv.asDiagonal() * Hf * winv.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatC> es(B, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("garding_defect: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

void write_matrix_csv(const MatC& m, const std::string& path) {
  std::ofstream f(path);
  require(f.good(), "write_matrix_csv: cannot open " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", m(i, j).real(), m(i, j).imag());
      f << buf << (j + 1 < m.cols() ? "," : "");
    }
    f << "\n";
  }
}

}  // namespace pevo
