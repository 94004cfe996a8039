#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pevo/tuning.hpp"

using namespace pevo;

namespace {

VecC random_field(const Grid& g, Rng& rng) {
  VecC u(g.size());
  for (int j = 0; j < g.size(); ++j) u[j] = rng.cgaussian();
  return u;
}

CoefficientSet p3_im_a2(double c, bool decay = true) {
  CoefficientSet cs;
  cs.p = 3;
  cs.a_p = [](double, double) { return 1.0; };
  cs.a.resize(3);
  cs.a[2] = [c, decay](double, double x, cxd) -> cxd {
    return decay ? cxd(0.0, c) / xbracket(x) : cxd(0.0, c);
  };
  cs.a[1] = [](double, double, cxd) -> cxd { return 0.0; };
  cs.a[0] = [](double, double, cxd) -> cxd { return 0.0; };
  cs.gamma = [](cxd) { return 1.0; };
  cs.C_p = 1.0;
  cs.C = std::max(1.0, c);
  return cs;
}

}  // namespace

TEST_CASE("cutoff pair") {
  for (int p : {2, 3, 4}) {
    CutoffPair cut{p};
    CHECK(cut.omega(0.5) == 0.0);
    CHECK(cut.omega(1.0) == 0.0);
    CHECK(cut.omega(3.0) == doctest::Approx(1.0));
    CHECK(cut.omega(-3.0) == doctest::Approx(p % 2 == 1 ? 1.0 : -1.0));
    CHECK(cut.psi(0.3) == 1.0);
    CHECK(cut.psi(0.5) == 1.0);
    CHECK(cut.psi(1.0) == 0.0);
    CHECK(cut.psi(2.0) == 0.0);
    double prev = 1.0;
    for (double y = 0.5; y <= 1.0; y += 0.01) {
      double v = cut.psi(y);
      CHECK(v <= prev + 1e-14);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = v;
    }
  }
}

TEST_CASE("build_lambda support and base point") {
  Grid g(128, 8.0);
  CutoffPair cut{3};
  Symbol lam = build_lambda(g, 3, 1, 2.0, 4.0, cut);
  const int j0 = g.size() / 2;
  for (int k = 0; k < g.size(); ++k) {
    if (std::abs(g.freq(k)) <= 4.0) {
      for (int j = 0; j < g.size(); ++j) CHECK(lam.samples(j, k) == cxd(0.0, 0.0));
    }
    CHECK(lam.samples(j0, k) == cxd(0.0, 0.0));  // empty integral at x = 0
  }
}

TEST_CASE("build_lambda asinh oracle (p=2, k=1, whole-line variant)") {
  Grid g(256, 8.0);
  CutoffPair cut{2};
  double h = 4.0, M = 1.5;
  Symbol lam = build_lambda(g, 2, 1, M, h, cut, true, /*periodic=*/false);
  int hits = 0;
  for (int k = 0; k < g.size(); ++k) {
    double xi = g.freq(k);
    if (std::abs(xi) < 2.0 * h) continue;  // omega fully on
    double brxi = bracket(xi, h);
    for (int j = 0; j < g.size(); ++j) {
      double x = g.node(j);
      if (xbracket(x) > 0.5 * brxi) continue;  // psi == 1 region
      double expected = M * (xi > 0 ? 1.0 : -1.0) * std::asinh(x);
      CHECK(std::abs(lam.samples(j, k).real() - expected) < 1e-8);
      ++hits;
    }
  }
  CHECK(hits > 100);
}

TEST_CASE("pack with all M = 0 is the identity transform") {
  Grid g(64, 8.0);
  CutoffPair cut{3};
  TransformPack pack = build_pack(g, 3, {0.0, 0.0}, 4.0, cut);
  CHECK(pack.Lambda.samples.cwiseAbs().maxCoeff() == 0.0);
  CHECK((pack.expLambda.samples.array() - 1.0).matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(pack.neumann_norm == doctest::Approx(0.0).epsilon(1e-12));
  Rng rng(5);
  VecC u = random_field(g, rng);
  CHECK((invert_exp_lambda(pack, u) - u).norm() / u.norm() < 1e-12);
  CHECK((invert_exp_lambda(pack, u, true) - u).norm() / u.norm() < 1e-12);
}

TEST_CASE("Lemma 2.2 bounds, p=3, M=(1,1), h=10") {
  Grid g(256, 8.0);  // ximax = 50 so |xi| > 2h is populated
  CutoffPair cut{3};
  TransformPack pack = build_pack(g, 3, {1.0, 1.0}, 10.0, cut);
  CHECK(lambda_p1_bound_violation(g, pack) <= 1e-8);
  CHECK(lambda_k_bound_violation(g, pack, 2) <= 1e-8);
}

TEST_CASE("log-growth fit (|Lambda| <= C + delta log<xi>_h)") {
  Grid g(256, 8.0);
  CutoffPair cut{3};
  TransformPack pack = build_pack(g, 3, {1.0, 0.5}, 5.0, cut);
  CHECK(pack.delta > 0.0);
  for (int k = 0; k < g.size(); ++k) {
    double bound = pack.C_fit + pack.delta * std::log(bracket(g.freq(k), pack.h));
    for (int j = 0; j < g.size(); ++j)
      CHECK(std::abs(pack.Lambda.samples(j, k)) <= bound + 1e-12);
  }
}

TEST_CASE("derivative bounds of Lambda are h-uniform") {
  Grid g(256, 8.0);
  CutoffPair cut{3};
  OrderTable t10 = lambda_derivative_constants(g, build_pack(g, 3, {1.0, 1.0}, 10.0, cut), 1, 1);
  OrderTable t20 = lambda_derivative_constants(g, build_pack(g, 3, {1.0, 1.0}, 20.0, cut), 1, 1);
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b) {
      if (a == 0 && b == 0) continue;  // (7) covers the log growth instead
      double lo = std::min(t10.C(a, b), t20.C(a, b)), hi = std::max(t10.C(a, b), t20.C(a, b));
      CHECK(hi > 0.0);
      CHECK((hi - lo) / hi < 0.2);
    }
}

TEST_CASE("exp(Lambda) decay constants stay finite") {
  Grid g(256, 8.0);
  CutoffPair cut{3};
  TransformPack pack = build_pack(g, 3, {1.0, 1.0}, 10.0, cut);
  for (int sign : {+1, -1}) {
    CHECK(exp_lambda_xi_decay_constant(g, pack, 1, sign) < 50.0);
    CHECK(exp_lambda_x_decay_constant(g, pack, 1, sign) < 50.0);
  }
}

TEST_CASE("neumann norm: nonincreasing in h and certification refusal") {
  Grid g(256, 8.0);
  CutoffPair cut{3};
  double prev = std::numeric_limits<double>::infinity();
  for (double h : {5.0, 10.0, 20.0}) {
    TransformPack pack = build_pack(g, 3, {1.0, 1.0}, h, cut);
    CHECK(pack.neumann_norm <= prev * (1.0 + 1e-6));
    prev = pack.neumann_norm;
  }
  SUBCASE("adversarial: h far below the constants") {
    TransformPack bad = build_pack(g, 3, {12.0, 12.0}, 1.0, cut);
    CHECK(bad.neumann_norm >= 1.0);
    Rng rng(7);
    VecC u = random_field(g, rng);
    CHECK_THROWS_AS(invert_exp_lambda(bad, u), std::invalid_argument);
  }
}

TEST_CASE("invert round trip within the geometric tail, dense solve exact") {
  Grid g(256, 8.0);
  CutoffPair cut{3};
  TransformPack pack = build_pack(g, 3, {1.0, 1.0}, 10.0, cut, 8);
  REQUIRE(pack.neumann_norm < 0.5);
  Rng rng(11);
  VecC u = random_field(g, rng);
  VecC v = apply_exp_lambda(pack, u);
  double rel = (invert_exp_lambda(pack, v) - u).norm() / u.norm();
  CHECK(rel <= std::pow(0.5, 9) / (1.0 - 0.5));
  VecC w = invert_exp_lambda(pack, v, true);
  CHECK((apply_exp_lambda(pack, w) - v).norm() / v.norm() <= 1e-10);
}

TEST_CASE("overflow guard suggests larger h") {
  Grid g(128, 8.0);
  CutoffPair cut{2};
  CHECK_THROWS_AS(build_pack(g, 2, {500.0}, 1.0, cut), std::invalid_argument);
}

TEST_CASE("tune: all-real coefficients keep M at the initial value") {
  Grid g(64, 20.0);
  CoefficientSet cs = p3_im_a2(0.0);
  cs.a[2] = [](double, double x, cxd) -> cxd { return 0.3 / xbracket(x); };  // real only
  CutoffPair cut{3};
  TuneOptions opt;
  opt.budget_c0 = 10.0;
  TuneReport rep;
  TransformPack pack = tune_constants(g, cs, VecC::Zero(64), cut, opt, &rep);
  CHECK(rep.success);
  for (double m : pack.M) CHECK(m == doctest::Approx(1.0));
  CHECK(rep.levels[0].paper_floor == doctest::Approx(0.0));
}

TEST_CASE("tune: M_2 nondecreasing in the Im a_2 amplitude") {
  Grid g(64, 20.0);
  CutoffPair cut{3};
  TuneOptions opt;
  opt.budget_c0 = 60.0;
  double prev = 0.0;
  for (double c : {0.1, 1.0, 10.0}) {
    TuneReport rep;
    TransformPack pack = tune_constants(g, p3_im_a2(c), VecC::Zero(64), cut, opt, &rep);
    CHECK(rep.success);
    CHECK(pack.M[0] >= prev - 1e-12);
    // paper's closed-form floor honored with the fitted decay constant
    CHECK(pack.M[0] >= rep.levels[0].paper_floor - 1e-12);
    prev = pack.M[0];
  }
}

TEST_CASE("tune: failure diagnostic names the offending level") {
  Grid g(64, 20.0);
  CutoffPair cut{3};
  TuneOptions opt;
  opt.budget_c0 = 1e-9;  // impossible budget
  opt.M_cap = 4.0;
  TuneReport rep;
  CHECK_THROWS_WITH_AS(tune_constants(g, p3_im_a2(5.0), VecC::Zero(64), cut, opt, &rep),
                       doctest::Contains("level"), std::runtime_error);
}
