#include <catch2/catch_amalgamated.hpp>

#include "ellhyp/numerics.hpp"
#include "ellhyp/quadrature.hpp"

using namespace ellhyp;

TEST_CASE("relative_residual floors the scale at one") {
  auto [res, scale] = relative_residual({1e-14, 0.0}, {0.0, 0.0});
  CHECK(res == 1e-14);
  CHECK(scale == 1.0);

  auto [res2, scale2] = relative_residual({100.0, 0.0}, {100.0, 1.0}, 250.0);
  CHECK(res2 == 1.0);
  CHECK(scale2 == 250.0);
}

TEST_CASE("CheckResult merge keeps the worse result") {
  CheckResult a{1e-12, 1.0, true, {}};
  CheckResult b{1e-6, 1.0, false, {cplx{2.0, 0.0}}};
  a.merge(b);
  CHECK(a.residual == 1e-6);
  CHECK_FALSE(a.pass);
  REQUIRE(a.witness.size() == 1);
}

TEST_CASE("Sampler is deterministic and seed sensitive") {
  Sampler s1(42), s2(42), s3(43);
  for (int i = 0; i < 16; ++i) {
    double u1 = s1.unit();
    CHECK(u1 == s2.unit());
    CHECK(u1 >= 0.0);
    CHECK(u1 < 1.0);
  }
  bool differs = false;
  Sampler s4(42);
  for (int i = 0; i < 16; ++i) differs |= (s4.unit() != s3.unit());
  CHECK(differs);
}

TEST_CASE("sub_seed separates labels and trials") {
  CHECK(sub_seed(7, "alpha", 0) != sub_seed(7, "beta", 0));
  CHECK(sub_seed(7, "alpha", 0) != sub_seed(7, "alpha", 1));
  CHECK(sub_seed(7, "alpha", 3) == sub_seed(7, "alpha", 3));
}

TEST_CASE("sample_annulus respects bounds and exclusions") {
  EllipticContext ctx;
  ctx.rng_seed = 11;
  auto pts = sample_annulus(0.3, 1.2, 64, {cplx{1.0, 0.0}}, ctx);
  REQUIRE(pts.size() == 64);
  for (const auto& x : pts) {
    double m = std::abs(x);
    CHECK(m >= 0.3);
    CHECK(m <= 1.2);
    CHECK(std::abs(std::arg(x)) >= 10.0 * ctx.eps_trunc);
  }
  auto again = sample_annulus(0.3, 1.2, 64, {cplx{1.0, 0.0}}, ctx);
  CHECK(pts == again);

  CHECK_THROWS_AS(sample_annulus(0.0, 1.0, 1, {}, ctx), std::invalid_argument);
}

TEST_CASE("integer and fractional powers") {
  cplx z{0.4, 0.7};
  CHECK(std::abs(ipow(z, 5) - z * z * z * z * z) < 1e-15);
  CHECK(std::abs(ipow(z, -3) * ipow(z, 3) - 1.0) < 1e-15);
  CHECK(std::abs(qpow(z, {0.5, 0.0}) - std::sqrt(z)) < 1e-15);
  // additivity of exponents under one branch
  cplx a{0.3, 0.1}, b{-0.2, 0.4};
  CHECK(std::abs(qpow(z, a) * qpow(z, b) - qpow(z, a + b)) < 1e-14);

  CHECK(half_falling(4) == 6);
  CHECK(half_falling(0) == 0);
  CHECK(half_falling(-2) == 3);
  CHECK(half_falling(1) == 0);
}

TEST_CASE("Kahan accumulator survives catastrophic cancellation") {
  KahanSum s;
  s.add({1e16, 0.0});
  s.add({1.0, 0.0});
  s.add({-1e16, 0.0});
  CHECK(s.value().real() == 1.0);
}

TEST_CASE("trapezoid_contour integrates Laurent monomials exactly") {
  EllipticContext ctx;
  ctx.tol = 1e-13;
  auto one = trapezoid_contour([](const cplx&) { return cplx{1.0, 0.0}; }, 1.0, 8, 10, ctx);
  CHECK(std::abs(one.value - 1.0) < 1e-15);

  for (int k : {1, 2, 3, -3}) {
    auto r = trapezoid_contour([k](const cplx& x) { return ipow(x, k); }, 1.0, 8, 10, ctx);
    CHECK(std::abs(r.value) < 1e-13);
  }
}

// Residue-theorem oracle: the rule computes (1/2 pi i) * integral of f dx/x,
// i.e. the sum of residues of f(x)/x inside the contour.
//   f(x) = x/(x - 0.3):  f(x)/x = 1/(x - 0.3), residue 1 at 0.3     -> 1
//   f(x) = 1/(x - 0.3):  residues -1/0.3 at 0 and +1/0.3 at 0.3     -> 0
TEST_CASE("trapezoid_contour matches residue oracle for poles inside") {
  EllipticContext ctx;
  ctx.tol = 1e-13;
  auto r1 = trapezoid_contour([](const cplx& x) { return x / (x - 0.3); }, 1.0, 16, 12, ctx);
  CHECK(std::abs(r1.value - 1.0) < 1e-12);

  auto r0 = trapezoid_contour([](const cplx& x) { return 1.0 / (x - 0.3); }, 1.0, 16, 12, ctx);
  CHECK(std::abs(r0.value) < 1e-12);
}

TEST_CASE("trapezoid_contour converges geometrically under doubling") {
  EllipticContext ctx;
  auto f = [](const cplx& x) { return x / (x - 0.3); };
  // manual doubling ladder: error after N nodes decays like 0.3^N
  double prev_err = -1.0;
  for (int n : {8, 16, 32, 64}) {
    KahanSum s;
    for (int j = 0; j < n; ++j) s.add(f(std::polar(1.0, 2.0 * pi * j / n)));
    double err = std::abs(s.value() / double(n) - 1.0);
    if (prev_err >= 0.0 && prev_err > 1e-14) CHECK(err <= prev_err / 2.0);
    prev_err = err;
  }
  CHECK(prev_err < 1e-14);
}

TEST_CASE("trapezoid_contour reports a stall honestly") {
  EllipticContext ctx;
  ctx.tol = 1e-16;  // unattainable: pole hugging the contour
  auto f = [](const cplx& x) { return 1.0 / (x - cplx{0.999, 0.0}); };
  CHECK_THROWS_WITH(trapezoid_contour(f, 1.0, 8, 3, ctx),
                    Catch::Matchers::ContainsSubstring("quadrature stall"));
}

TEST_CASE("residue_circle recovers simple residues") {
  EllipticContext ctx;
  ctx.tol = 1e-13;
  cplx a{0.4, 0.2};
  auto f = [a](const cplx& z) { return cplx{2.5, -1.0} / (z - a); };
  auto r = residue_circle(f, a, 0.05, 16, 10, ctx);
  CHECK(std::abs(r.value - cplx{2.5, -1.0}) < 1e-12);
}

TEST_CASE("near_power_of identifies lattice points") {
  cplx p{0.3, 0.05};
  auto hit = near_power_of(ipow(p, 3), p, 1e-13);
  REQUIRE(hit.has_value());
  CHECK(*hit == 3);

  auto neg = near_power_of(ipow(p, -2), p, 1e-13);
  REQUIRE(neg.has_value());
  CHECK(*neg == -2);

  CHECK_FALSE(near_power_of(1.1 * ipow(p, 3), p, 1e-13).has_value());
  CHECK_FALSE(near_power_of(cplx{0.0, 0.0}, p, 1e-13).has_value());
}

TEST_CASE("pq_collision flags resonant nome pairs") {
  EllipticContext bad;
  bad.p = {0.4, 0.0};
  bad.q = bad.p * bad.p;
  auto hit = pq_collision(bad);
  REQUIRE(hit.has_value());
  // q = p^2, so any reported (k, l) with q^k = p^l must satisfy l = 2k
  CHECK(hit->second == 2 * hit->first);

  EllipticContext good;  // defaults are generic
  CHECK_FALSE(pq_collision(good).has_value());
}

TEST_CASE("context validation rejects bad nomes") {
  EllipticContext ctx;
  ctx.p = {1.2, 0.0};
  CHECK_THROWS_AS(ctx.require_valid(), std::invalid_argument);
  ctx.p = {0.3, 0.0};
  ctx.tol = -1.0;
  CHECK_THROWS_AS(ctx.require_valid(), std::invalid_argument);
  ctx.tol = 1e-9;
  CHECK_NOTHROW(ctx.require_valid());
}
