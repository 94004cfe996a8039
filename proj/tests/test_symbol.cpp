#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pevo/symbol.hpp"

using namespace pevo;

namespace {

VecC random_field(const Grid& g, Rng& rng) {
  VecC u(g.size());
  for (int j = 0; j < g.size(); ++j) u[j] = rng.cgaussian();
  return u;
}

}  // namespace

TEST_CASE("quantize: identity symbol") {
  Grid g(32, 5.0);
  Rng rng(3);
  VecC u = random_field(g, rng);
  Symbol one = Symbol::from_function(g, [](double, double) { return cxd(1.0, 0.0); }, 0.0);
  CHECK((quantize_apply(g, one, u) - u).norm() / u.norm() < 1e-12);
}

TEST_CASE("quantize: xi^p multiplier on a mode") {
  Grid g(32, 5.0);
  const int p = 3;
  double xi1 = g.freq(1);
  VecC u(32);
  for (int j = 0; j < 32; ++j) u[j] = std::exp(cxd(0.0, xi1 * g.node(j)));
  Symbol a = Symbol::from_function(g, [&](double, double xi) { return cxd(std::pow(xi, p), 0.0); },
                                   p);
  VecC out = quantize_apply(g, a, u);
  CHECK((out - std::pow(xi1, p) * u).norm() / u.norm() < 1e-11);
}

TEST_CASE("quantize: x-only symbol is a pointwise product") {
  Grid g(48, 8.0);
  Rng rng(5);
  VecC u = random_field(g, rng);
  auto cfun = [](double x) { return cxd(std::cos(0.3 * x), 0.1 * std::sin(x)); };
  Symbol a = Symbol::from_function(g, [&](double x, double) { return cfun(x); }, 0.0);
  VecC out = quantize_apply(g, a, u);
  VecC expect(48);
  for (int j = 0; j < 48; ++j) expect[j] = cfun(g.node(j)) * u[j];
  CHECK((out - expect).norm() / expect.norm() < 1e-10);
}

TEST_CASE("quantize is linear in the symbol") {
  Grid g(32, 5.0);
  Rng rng(7);
  VecC u = random_field(g, rng);
  Symbol a1 = Symbol::from_function(g, [](double x, double xi) { return cxd(xi * xi, x); }, 2.0);
  Symbol a2 = Symbol::from_function(g, [](double x, double xi) { return std::exp(cxd(0, x - xi)); }, 0.0);
  Symbol sum = a1;
  sum.samples += a2.samples;
  VecC lhs = quantize_apply(g, sum, u);
  VecC rhs = quantize_apply(g, a1, u) + quantize_apply(g, a2, u);
  CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("to_matrix: identity and matrix-vector consistency") {
  Grid g(32, 5.0);
  Symbol one = Symbol::from_function(g, [](double, double) { return cxd(1.0, 0.0); }, 0.0);
  MatC m = to_matrix(g, one);
  CHECK((m - MatC::Identity(32, 32)).norm() < 1e-10);

  Rng rng(11);
  Symbol a = Symbol::from_function(g, [](double x, double xi) { return cxd(xi, 0.2 * x); }, 1.0);
  MatC ma = to_matrix(g, a);
  for (int trial = 0; trial < 10; ++trial) {
    VecC u = random_field(g, rng);
    VecC v1 = ma * u, v2 = quantize_apply(g, a, u);
    CHECK((v1 - v2).norm() / v2.norm() < 1e-10);
  }
}

TEST_CASE("to_matrix: multiplier diagonal in the DFT basis") {
  Grid g(32, 5.0);
  VecC mvals(32);
  for (int k = 0; k < 32; ++k) mvals[k] = cxd(g.freq(k) * g.freq(k), 0.5 * g.freq(k));
  Symbol a = Symbol::multiplier(g, mvals, 2.0);
  MatC m = to_matrix(g, a);
  MatC mf = g.analysis_matrix() * m * g.synthesis_matrix();
  MatC off = mf;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-10);
  for (int k = 0; k < 32; ++k) CHECK(std::abs(mf(k, k) - mvals[k]) < 1e-10);
}

TEST_CASE("to_matrix: x-only symbol is a convolution on the DFT side") {
  Grid g(32, 5.0);
  Rng rng(13);
  // band-limited random coefficient so the circulant check is exact
  VecC chat = VecC::Zero(32);
  for (int k = 0; k < 5; ++k) {
    chat[k] = rng.cgaussian();
    if (k > 0) chat[32 - k] = rng.cgaussian();
  }
  VecC c = g.inverse(chat);
  Symbol a = Symbol::coefficient(g, c);
  MatC mf = g.analysis_matrix() * to_matrix(g, a) * g.synthesis_matrix();
  for (int d = 0; d < 32; ++d) {
    cxd ref = mf(d, 0);
    for (int k = 0; k < 32; ++k) {
      cxd val = mf((k + d) % 32, k);
      CHECK(std::abs(val - ref) < 1e-9 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("verify_symbol_order") {
  Grid g(128, 10.0);
  SUBCASE("exact weight has C_00 = 1") {
    double h = 2.0, m = 1.5;
    Symbol a = Symbol::from_function(
        g, [&](double, double xi) { return cxd(std::pow(bracket(xi, h), m), 0.0); }, m, h);
    OrderTable tab = verify_symbol_order(g, a, 0, 0);
    CHECK(tab.C(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("xi^2 first xi-derivative constant is at most 2") {
    Symbol a = Symbol::from_function(g, [](double, double xi) { return cxd(xi * xi, 0.0); }, 2.0);
    OrderTable tab = verify_symbol_order(g, a, 1, 0);
    CHECK(tab.C(1, 0) <= 2.0 + 1e-6);
    CHECK(tab.C(1, 0) > 1.5);  // sup |2 xi|/<xi> approaches 2
  }
  SUBCASE("derivative orders above the Fefferman-Phong cap are rejected") {
    Symbol a = Symbol::from_function(g, [](double, double) { return cxd(1.0, 0.0); }, 0.0);
    CHECK_THROWS(verify_symbol_order(g, a, 8, 0));
  }
}

TEST_CASE("garding defect") {
  Grid g(32, 5.0);
  SUBCASE("identity") {
    CHECK(garding_defect(g, MatC::Identity(32, 32), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("nonnegative multiplier") {
    VecC mvals(32);
    for (int k = 0; k < 32; ++k) mvals[k] = cxd(g.freq(k) * g.freq(k), 0.0);
    MatC m = to_matrix(g, Symbol::multiplier(g, mvals, 2.0));
    CHECK(garding_defect(g, m, 0.0) >= -1e-10);
  }
  SUBCASE("nonnegative real part, x-independent symbol") {
    VecC mvals(32);
    for (int k = 0; k < 32; ++k) mvals[k] = cxd(std::abs(g.freq(k)), -0.7 * g.freq(k));
    MatC m = to_matrix(g, Symbol::multiplier(g, mvals, 1.0));
    CHECK(garding_defect(g, m, 0.0) >= -1e-10);
  }
  SUBCASE("invariant under adding a skew-Hermitian matrix") {
    Rng rng(17);
    MatC a(32, 32), s(32, 32);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) {
        a(i, j) = rng.cgaussian();
        s(i, j) = rng.cgaussian();
      }
    MatC skew = 0.5 * (s - s.adjoint());
    double d1 = garding_defect(g, a, 0.5);
    double d2 = garding_defect(g, a + skew, 0.5);
    CHECK(std::abs(d1 - d2) < 1e-12 * std::max(1.0, std::abs(d1)));
  }
}

TEST_CASE("garding defect bounded under refinement for a decaying-real-part symbol") {
  // a(x,xi) = <x>^{-1} xi^2 + i b(x) xi with small b, compared at (m-1)/2
  std::vector<double> defects;
  for (int N : {64, 128, 256}) {
    Grid g(N, 20.0);
    Symbol a = Symbol::from_function(
        g,
        [](double x, double xi) {
          return cxd(xi * xi / xbracket(x), 0.05 * xi / (1.0 + x * x));
        },
        2.0);
    defects.push_back(garding_defect(g, to_matrix(g, a), 0.5));
  }
  for (double d : defects) CHECK(d > -2.0);
  CHECK(std::abs(defects[2] - defects[1]) < 1.0 + std::abs(defects[1]));
}
