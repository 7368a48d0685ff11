#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "ellhyp/biorthogonal.hpp"

using namespace ellhyp;

namespace {

EllipticContext default_ctx() {
  EllipticContext ctx;
  ctx.p = {0.25, 0.12};
  ctx.q = {0.3, -0.07};
  return ctx;
}

// ab = q^{-n} forces a large modulus somewhere; splitting it evenly between
// a and b keeps the node values and weights in a range where the diagonal
// comparison against the closed-form norm stays stringent.
BiorthogonalFamily seeded_family(std::uint64_t seed, int trial, long long n,
                                 const EllipticContext& ctx) {
  Sampler rng(sub_seed(seed, "bio", trial));
  double split = std::pow(std::abs(ctx.q), -0.5 * double(n));
  cplx a = split * rng.annulus(0.7, 1.3);
  cplx c = rng.annulus(0.6, 1.3);
  cplx d = rng.annulus(0.6, 1.3);
  cplx e = rng.annulus(0.6, 1.3);
  return make_family(a, c, d, e, n, ctx);
}

}  // namespace

TEST_CASE("family construction solves the two constraints") {
  EllipticContext ctx = default_ctx();
  BiorthogonalFamily fam = seeded_family(11, 0, 3, ctx);
  REQUIRE(std::abs(fam.a * fam.b - ipow(ctx.q, -3)) < 1e-12 * std::abs(ipow(ctx.q, -3)));
  REQUIRE(std::abs(fam.a * fam.b * fam.c * fam.d * fam.e * fam.f - ctx.q) < 1e-12);

  BiorthogonalFamily bad = fam;
  bad.f *= 1.01;
  REQUIRE_THROWS_AS(bad.require_valid(ctx), std::invalid_argument);
  bad = fam;
  bad.b *= 1.01;
  REQUIRE_THROWS_AS(bad.require_valid(ctx), std::invalid_argument);
}

TEST_CASE("lowest rational function is identically one") {
  EllipticContext ctx = default_ctx();
  BiorthogonalFamily fam = seeded_family(12, 0, 2, ctx);
  Sampler rng(sub_seed(12, "bio-x", 0));
  for (int i = 0; i < 4; ++i) {
    cplx x = rng.annulus(0.5, 1.4);
    REQUIRE(std::abs(r_fn(0, x, fam, ctx) - cplx{1.0, 0.0}) < 1e-14);
  }
  REQUIRE_THROWS_AS(r_fn(-1, cplx{1.0, 0.0}, fam, ctx), std::invalid_argument);
}

TEST_CASE("rational functions are even and elliptic in their variable") {
  EllipticContext ctx = default_ctx();
  for (int trial = 0; trial < 5; ++trial) {
    BiorthogonalFamily fam = seeded_family(13, trial, 4, ctx);
    Sampler rng(sub_seed(13, "bio-x", trial));
    cplx x = rng.annulus(0.6, 1.3);
    for (long long k : {1LL, 2LL, 3LL}) {
      cplx base = r_fn(k, x, fam, ctx);
      double scale = std::max(1.0, std::abs(base));
      REQUIRE(std::abs(r_fn(k, 1.0 / x, fam, ctx) - base) < 1e-12 * scale);
      REQUIRE(std::abs(r_fn(k, ctx.p * x, fam, ctx) - base) < 1e-11 * scale);
    }
  }
}

TEST_CASE("rational functions are symmetric in their first four parameters") {
  EllipticContext ctx = default_ctx();
  for (int trial = 0; trial < 5; ++trial) {
    BiorthogonalFamily fam = seeded_family(14, trial, 3, ctx);
    Sampler rng(sub_seed(14, "bio-x", trial));
    cplx x = rng.annulus(0.6, 1.3);
    cplx base = r_fn(2, x, fam, ctx);
    double scale = std::max(1.0, std::abs(base));

    BiorthogonalFamily swapped = fam;
    std::swap(swapped.a, swapped.b);
    REQUIRE(std::abs(r_fn(2, x, swapped, ctx) - base) < 1e-11 * scale);

    swapped = fam;
    std::swap(swapped.a, swapped.c);
    REQUIRE(std::abs(r_fn(2, x, swapped, ctx) - base) < 1e-11 * scale);

    swapped = fam;
    std::swap(swapped.c, swapped.d);
    REQUIRE(std::abs(r_fn(2, x, swapped, ctx) - base) < 1e-11 * scale);

    swapped = fam;
    std::swap(swapped.b, swapped.d);
    REQUIRE(std::abs(r_fn(2, x, swapped, ctx) - base) < 1e-11 * scale);
  }
}

TEST_CASE("degree-zero family pairs to a single matching weight and norm") {
  EllipticContext ctx = default_ctx();
  BiorthogonalFamily fam = seeded_family(15, 0, 0, ctx);
  std::vector<cplx> w = biorthogonality_weights(fam, ctx);
  REQUIRE(w.size() == 1);
  REQUIRE(std::abs(w[0] - cplx{1.0, 0.0}) < 1e-14);
  REQUIRE(std::abs(biorthogonality_norm(0, fam, ctx) - cplx{1.0, 0.0}) < 1e-14);
  auto g = gram_matrix(fam, ctx);
  REQUIRE(g.size() == 1);
  REQUIRE(std::abs(g[0][0] - cplx{1.0, 0.0}) < 1e-13);
}

TEST_CASE("weight sums reproduce the degree-zero norm") {
  EllipticContext ctx = default_ctx();
  for (long long n = 1; n <= 5; ++n) {
    BiorthogonalFamily fam = seeded_family(16, int(n), n, ctx);
    std::vector<cplx> w = biorthogonality_weights(fam, ctx);
    KahanSum sum;
    double scale = 0.0;
    for (const cplx& t : w) {
      scale = std::max(scale, std::abs(t));
      sum.add(t);
    }
    cplx c0 = biorthogonality_norm(0, fam, ctx);
    CheckResult r = make_check(sum.value(), c0, scale, ctx);
    INFO("n=" << n << " ratio=" << r.ratio());
    REQUIRE(r.ratio() < 1e-11);
  }
}

TEST_CASE("discrete pairing is diagonal with closed-form norms") {
  EllipticContext ctx = default_ctx();
  BiorthogonalFamily fam = seeded_family(17, 0, 4, ctx);
  std::vector<cplx> w = biorthogonality_weights(fam, ctx);
  auto g = gram_matrix(fam, ctx);
  for (long long k = 0; k <= fam.n; ++k)
    for (long long l = 0; l <= fam.n; ++l) {
      double scale = 0.0;
      for (long long j = 0; j <= fam.n; ++j) {
        cplx node = fam.a * ipow(ctx.q, j);
        scale = std::max(scale, std::abs(w[j] * r_fn(k, node, fam, ctx) *
                                         r_fn(l, node, fam.dual(), ctx)));
      }
      cplx expect = (k == l) ? biorthogonality_norm(k, fam, ctx) : cplx{0.0, 0.0};
      CheckResult r = make_check(g[k][l], expect, scale, ctx);
      INFO("k=" << k << " l=" << l << " ratio=" << r.ratio());
      REQUIRE(r.ratio() < 1e-10);
    }
}

TEST_CASE("pairing stays diagonal without the modulus-splitting draw") {
  // Unbalanced draws push the term scale far above the norms; the residual
  // still has to vanish relative to that scale.
  EllipticContext ctx = default_ctx();
  for (int trial = 0; trial < 4; ++trial) {
    Sampler rng(sub_seed(18, "bio-raw", trial));
    long long n = rng.integer(1, 4);
    cplx a = rng.annulus(0.5, 1.3);
    cplx c = rng.annulus(0.5, 1.3);
    cplx d = rng.annulus(0.5, 1.3);
    cplx e = rng.annulus(0.5, 1.3);
    BiorthogonalFamily fam = make_family(a, c, d, e, n, ctx);
    CheckResult r = biorthogonality_check(fam, ctx);
    INFO("trial=" << trial << " n=" << n << " ratio=" << r.ratio());
    REQUIRE(r.ratio() < 1e-9);
  }
}

TEST_CASE("ten seeded families up to degree six stay biorthogonal") {
  EllipticContext ctx = default_ctx();
  for (int trial = 0; trial < 10; ++trial) {
    Sampler rng(sub_seed(42, "bio", trial));
    long long n = rng.integer(0, 6);
    double split = std::pow(std::abs(ctx.q), -0.5 * double(n));
    cplx a = split * rng.annulus(0.7, 1.3);
    cplx c = rng.annulus(0.6, 1.3);
    cplx d = rng.annulus(0.6, 1.3);
    cplx e = rng.annulus(0.6, 1.3);
    BiorthogonalFamily fam = make_family(a, c, d, e, n, ctx);
    CheckResult r = biorthogonality_check(fam, ctx);
    INFO("trial=" << trial << " n=" << n << " ratio=" << r.ratio());
    REQUIRE(r.pass);
    REQUIRE(r.ratio() < 1e-9);
  }
}
