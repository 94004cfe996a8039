#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pevo/grid.hpp"

using namespace pevo;

namespace {

VecC random_field(const Grid& g, Rng& rng) {
  VecC u(g.size());
  for (int j = 0; j < g.size(); ++j) u[j] = rng.cgaussian();
  return u;
}

// O(N^2) direct DFT with the library normalization
VecC brute_forward(const Grid& g, const VecC& u) {
  const int n = g.size();
  VecC uhat = VecC::Zero(n);
  double coef = std::sqrt(2.0 * g.half_length()) / n;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      uhat[k] += coef * u[j] * std::exp(cxd(0.0, -g.freq(k) * g.node(j)));
  return uhat;
}

}  // namespace

TEST_CASE("bracket basics") {
  CHECK(bracket(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(bracket(3.0, 4.0) == doctest::Approx(5.0));
  CHECK(bracket(1.0, 1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(bracket(2.0, 1.0) > bracket(1.0, 1.0));
  CHECK(bracket(1.0, 2.0) > bracket(1.0, 1.0));
  CHECK_THROWS_AS(bracket(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("transform round trip") {
  Grid g(64, 10.0);
  Rng rng(7);
  VecC u = random_field(g, rng);
  VecC back = g.inverse(g.forward(u));
  CHECK((back - u).norm() / u.norm() < 1e-12);
}

TEST_CASE("forward matches brute-force DFT") {
  Grid g(32, 5.0);
  Rng rng(9);
  VecC u = random_field(g, rng);
  VecC a = g.forward(u), b = brute_forward(g, u);
  CHECK((a - b).norm() / b.norm() < 1e-12);
}

TEST_CASE("sobolev norm basics") {
  Grid g(64, 10.0);
  SUBCASE("zero field") {
    CHECK(g.sobolev_norm(VecC::Zero(64), 2.0, 1.0) == 0.0);
  }
  SUBCASE("single mode Parseval") {
    double xi1 = g.freq(1);
    VecC u(64);
    for (int j = 0; j < 64; ++j) u[j] = std::exp(cxd(0.0, xi1 * g.node(j)));
    double expected = std::pow(bracket(xi1, 1.0), 1.5) * std::sqrt(2.0 * g.half_length());
    CHECK(g.sobolev_norm(u, 1.5, 1.0) == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("random field vs brute-force weighted sum") {
    Rng rng(11);
    VecC u = random_field(g, rng);
    VecC uhat = brute_forward(g, u);
    double acc = 0.0;
    for (int k = 0; k < 64; ++k) acc += std::pow(bracket(g.freq(k), 1.0), 4.0) * std::norm(uhat[k]);
    CHECK(g.sobolev_norm(u, 2.0, 1.0) == doctest::Approx(std::sqrt(acc)).epsilon(1e-10));
  }
}

TEST_CASE("Parseval: s=0 norm is h-independent and equals the quadrature L2 norm") {
  Grid g(48, 7.0);
  Rng rng(13);
  VecC u = random_field(g, rng);
  double quad = std::sqrt(2.0 * g.half_length() / g.size() * u.squaredNorm());
  for (double h : {1.0, 2.0, 17.0})
    CHECK(g.sobolev_norm(u, 0.0, h) == doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("norm monotone in s") {
  Grid g(64, 10.0);
  Rng rng(17);
  VecC u = random_field(g, rng);
  double prev = g.sobolev_norm(u, -1.0, 1.0);
  for (double s : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    double cur = g.sobolev_norm(u, s, 1.0);
    CHECK(cur >= prev * (1.0 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("derivative multiplier") {
  Grid g(64, 10.0);
  double xi1 = g.freq(1);
  VecC u(64);
  for (int j = 0; j < 64; ++j) u[j] = std::exp(cxd(0.0, xi1 * g.node(j)));
  SUBCASE("eigenfunction of D_x") {
    VecC du = g.derivative(u, 1);
    CHECK((du - xi1 * u).norm() / u.norm() < 1e-12);
  }
  SUBCASE("order zero is the identity") {
    VecC du = g.derivative(u, 0);
    CHECK((du - u).norm() == 0.0);
  }
  SUBCASE("D^2 on a sine") {
    VecC s(64);
    for (int j = 0; j < 64; ++j) s[j] = std::sin(xi1 * g.node(j));
    VecC d2 = g.derivative(s, 2);
    CHECK((d2 - xi1 * xi1 * s).norm() / s.norm() < 1e-12);
  }
}

TEST_CASE("derivative composition") {
  // field well inside the box so the Nyquist mode carries no energy
  // (odd orders zero it, even orders keep it)
  Grid g(64, 20.0);
  VecC u(64);
  for (int j = 0; j < 64; ++j) {
    double x = g.node(j);
    u[j] = std::exp(-x * x / 9.0) * std::exp(cxd(0.0, g.freq(2) * x));
  }
  for (auto [a, b] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 1}}) {
    VecC lhs = g.derivative(g.derivative(u, a), b);
    VecC rhs = g.derivative(u, a + b);
    CHECK((lhs - rhs).norm() / rhs.norm() < 1e-10);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(63, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(64, -1.0), std::invalid_argument);
}

TEST_CASE("inner product matches quadrature") {
  Grid g(32, 4.0);
  Rng rng(23);
  VecC u = random_field(g, rng), v = random_field(g, rng);
  cxd ip = g.inner(u, v);
  cxd direct = 0.0;
  for (int j = 0; j < 32; ++j) direct += u[j] * std::conj(v[j]) * (2.0 * 4.0 / 32);
  CHECK(std::abs(ip - direct) < 1e-12);
}
