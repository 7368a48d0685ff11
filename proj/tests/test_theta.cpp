#include <catch2/catch_amalgamated.hpp>

#include "ellhyp/numerics.hpp"
#include "ellhyp/theta.hpp"
#include "oracles.hpp"

using namespace ellhyp;

namespace {
const std::vector<cplx> kNomes = {{0.1, 0.0}, {0.4, 0.0}, {0.2, 0.3}, {-0.35, 0.0}};
}

TEST_CASE("qpochhammer_inf agrees with the brute-force product") {
  EllipticContext ctx;
  for (const cplx& p : kNomes) {
    for (const cplx& a : {cplx{0.5, 0.0}, cplx{-1.3, 0.4}, cplx{2.0, -1.0}, cplx{0.01, 0.9}}) {
      cplx got = qpochhammer_inf(a, p, ctx);
      cplx want = oracle::brute_qpochhammer(a, p, 600);
      CAPTURE(p, a);
      CHECK(std::abs(got - want) <= 1e-14 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("qpochhammer_inf degenerate nomes and zeros") {
  EllipticContext ctx;
  cplx p{0.35, 0.1};
  CHECK(qpochhammer_inf({0.4, 0.0}, {0.0, 0.0}, ctx) == cplx{0.6, 0.0});
  CHECK(qpochhammer_inf({1.0, 0.0}, p, ctx) == cplx{0.0, 0.0});
  CHECK(qpochhammer_inf(ipow(p, -2), p, ctx) == cplx{0.0, 0.0});
  CHECK(qpochhammer_inf(ipow(p, 2), p, ctx) != cplx{0.0, 0.0});
  CHECK_THROWS_AS(qpochhammer_inf({0.5, 0.0}, {1.0, 0.0}, ctx), std::invalid_argument);
}

TEST_CASE("theta at p = 0 reduces to 1 - x and rejects x = 0") {
  EllipticContext ctx;
  CHECK(theta({0.4, 0.0}, {0.0, 0.0}, ctx) == cplx{0.6, 0.0});
  CHECK_THROWS_AS(theta({0.0, 0.0}, {0.3, 0.0}, ctx), std::invalid_argument);
}

TEST_CASE("theta vanishes exactly on the lattice x in p^Z") {
  EllipticContext ctx;
  for (const cplx& p : kNomes)
    for (int k : {-2, -1, 0, 1, 2, 3}) CHECK(theta(ipow(p, k), p, ctx) == cplx{0.0, 0.0});
}

TEST_CASE("product and series forms of theta agree to 1e-12") {
  EllipticContext ctx;
  for (const cplx& p : kNomes) {
    EllipticContext c = ctx;
    c.p = p;
    c.rng_seed = 101;
    // keep clear of the zero rays through p^Z
    std::vector<cplx> rays;
    for (int k = -2; k <= 2; ++k) rays.push_back(ipow(p, k) / std::abs(ipow(p, k)));
    auto xs = sample_annulus(std::abs(p), 1.0, 64, rays, c);
    for (const cplx& x : xs) {
      cplx a = theta(x, p, ctx), b = theta_series(x, p, ctx);
      CAPTURE(p, x);
      CHECK(std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}));
    }
  }
}

TEST_CASE("quasi-periodicity theta(px) = -theta(x)/x") {
  EllipticContext ctx;
  ctx.rng_seed = 7;
  for (const cplx& p : kNomes) {
    auto xs = sample_annulus(std::abs(p), 1.0, 16, {}, ctx);
    for (const cplx& x : xs) {
      cplx lhs = theta(p * x, p, ctx);
      cplx rhs = -theta(x, p, ctx) / x;
      CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
  }
}

TEST_CASE("inversion theta(1/x) = -theta(x)/x") {
  EllipticContext ctx;
  ctx.rng_seed = 8;
  cplx p{0.2, 0.3};
  auto xs = sample_annulus(0.4, 1.4, 16, {}, ctx);
  for (const cplx& x : xs) {
    cplx lhs = theta(1.0 / x, p, ctx);
    cplx rhs = -theta(x, p, ctx) / x;
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
  }
}

TEST_CASE("quasi_shift matches direct evaluation for small k") {
  EllipticContext ctx;
  ctx.rng_seed = 9;
  cplx p{0.3, -0.1};
  auto xs = sample_annulus(0.5, 1.3, 8, {}, ctx);
  for (const cplx& x : xs) {
    for (long long k : {-2LL, -1LL, 0LL, 1LL, 2LL, 3LL}) {
      cplx direct = theta(ipow(p, k) * x, p, ctx);
      cplx shifted = quasi_shift(x, p, k, ctx);
      CAPTURE(x, k);
      CHECK(std::abs(direct - shifted) <=
            1e-12 * std::max({1.0, std::abs(direct), std::abs(shifted)}));
    }
  }
}

TEST_CASE("duplication splits theta(x^2) into four factors") {
  EllipticContext ctx;
  ctx.rng_seed = 10;
  for (const cplx& p : kNomes) {
    cplx rp = std::sqrt(p);
    auto xs = sample_annulus(0.6, 1.2, 8, {}, ctx);
    for (const cplx& x : xs) {
      cplx lhs = theta(x * x, p, ctx);
      cplx rhs = theta_multi({x, -x, rp * x, -rp * x}, p, ctx);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)}));
    }
  }
}

TEST_CASE("theta(-1) theta(sqrt p) theta(-sqrt p) = 2") {
  EllipticContext ctx;
  for (const cplx& p : kNomes) {
    cplx rp = std::sqrt(p);
    cplx v = theta_multi({cplx{-1.0, 0.0}, rp, -rp}, p, ctx);
    CAPTURE(p);
    CHECK(std::abs(v - 2.0) <= 1e-12 * 2.0);
  }
}

TEST_CASE("three-term relation holds across seeded draws") {
  EllipticContext ctx;
  cplx p{0.25, 0.15};
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Sampler s(sub_seed(3, "ttr", trial));
    cplx x = s.annulus(0.3, 1.5), a = s.annulus(0.3, 1.5), b = s.annulus(0.3, 1.5),
         c = s.annulus(0.3, 1.5);
    cplx t1 = theta_pm(a, x, p, ctx) * theta_pm(b, c, p, ctx);
    cplx t2 = theta_pm(b, x, p, ctx) * theta_pm(a, c, p, ctx);
    cplx t3 = (a / c) * theta_pm(c, x, p, ctx) * theta_pm(b, a, p, ctx);
    double scale = std::max({1.0, std::abs(t1), std::abs(t2), std::abs(t3)});
    CAPTURE(x, a, b, c);
    CHECK(std::abs(t1 - t2 - t3) <= 1e-9 * scale);
  }
}

TEST_CASE("theta_pm and theta_multi compose elementary thetas") {
  EllipticContext ctx;
  cplx p{0.3, 0.0}, a{0.7, 0.2}, x{1.1, -0.4};
  cplx direct = theta(a * x, p, ctx) * theta(a / x, p, ctx);
  CHECK(std::abs(theta_pm(a, x, p, ctx) - direct) < 1e-14 * std::abs(direct));
  cplx m = theta_multi({a, x}, p, ctx);
  CHECK(std::abs(m - theta(a, p, ctx) * theta(x, p, ctx)) < 1e-14 * std::abs(m));
}
