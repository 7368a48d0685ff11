#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ellhyp/beta_integral.hpp"

using namespace ellhyp;

namespace {

EllipticContext default_ctx() {
  EllipticContext ctx;
  ctx.p = {0.25, 0.12};
  ctx.q = {0.3, -0.07};
  return ctx;
}

// Balanced m=5 spec with t_5 solved from the (pq)^{(m-3)/2} constraint.
IntegralSpec balanced_spec(const std::vector<cplx>& t05, const EllipticContext& ctx) {
  IntegralSpec spec;
  spec.t = t05;
  cplx prod{1.0, 0.0};
  for (const cplx& tj : t05) prod *= tj;
  spec.t.push_back(ctx.p * ctx.q / prod);
  spec.p = ctx.p;
  spec.q = ctx.q;
  return spec;
}

// Seeded admissible draw: nomes in a mid annulus, parameters resampled until
// the solved t_5 stays inside the disk.
IntegralSpec seeded_spec(std::uint64_t seed, int trial, EllipticContext& ctx) {
  Sampler rng(sub_seed(seed, "beta", trial));
  ctx.p = rng.annulus(0.15, 0.38);
  ctx.q = rng.annulus(0.15, 0.38);
  for (;;) {
    std::vector<cplx> t05;
    for (int j = 0; j < 5; ++j) t05.push_back(rng.annulus(0.5, 0.78));
    IntegralSpec spec = balanced_spec(t05, ctx);
    if (std::abs(spec.t[5]) <= 0.8) return spec;
  }
}

// Parameters for the product-q pairing: all moduli near |q|^{1/6} so the
// solved sixth parameter stays inside the disk.
struct PairingDraw {
  EllipticContext ctx;
  std::vector<cplx> t05;
  cplx t5() const {
    cplx prod{1.0, 0.0};
    for (const cplx& tj : t05) prod *= tj;
    return ctx.q / prod;
  }
};

PairingDraw pairing_draw(int which) {
  PairingDraw d;
  if (which == 0) {
    d.ctx.p = {0.11, 0.05};
    d.ctx.q = {0.31, 0.0};
    d.t05 = {cplx{0.80, 0.05}, cplx{0.78, -0.06}, cplx{0.83, 0.02},
             cplx{0.76, 0.04}, cplx{0.81, -0.03}};
  } else {
    d.ctx.p = {0.21, -0.08};
    d.ctx.q = {0.26, 0.09};
    d.t05 = {cplx{0.77, -0.04}, cplx{0.82, 0.03}, cplx{0.79, 0.05},
             cplx{0.84, -0.02}, cplx{0.75, 0.06}};
  }
  return d;
}

}  // namespace

TEST_CASE("contour integrand is symmetric under x inversion") {
  EllipticContext ctx = default_ctx();
  IntegralSpec spec = seeded_spec(61, 0, ctx);
  Sampler rng(sub_seed(61, "beta-x", 0));
  for (int i = 0; i < 8; ++i) {
    cplx x = std::polar(1.0, 2.0 * pi * rng.unit());
    cplx fx = wp_integrand(x, spec, ctx);
    cplx finv = wp_integrand(1.0 / x, spec, ctx);
    REQUIRE(std::isfinite(std::abs(fx)));
    REQUIRE(std::abs(fx - finv) <= 1e-12 * std::max(1.0, std::abs(fx)));
  }
}

TEST_CASE("equal-parameter evaluation matches the gamma product closed form") {
  EllipticContext ctx;
  ctx.p = {0.05, 0.0};
  ctx.q = {0.05, 0.0};
  double t = std::pow(0.05 * 0.05, 1.0 / 6.0);
  std::vector<cplx> t05(5, cplx{t, 0.0});
  CheckResult r = beta_integral_check(t05, ctx.p, ctx.q, ctx);
  REQUIRE(r.residual <= 1e-8 * r.scale);
}

TEST_CASE("seeded draws match the closed form") {
  for (int trial = 0; trial < 8; ++trial) {
    EllipticContext ctx;
    IntegralSpec spec = seeded_spec(62, trial, ctx);
    std::vector<cplx> t05(spec.t.begin(), spec.t.begin() + 5);
    CheckResult r = beta_integral_check(t05, ctx.p, ctx.q, ctx);
    INFO("trial " << trial << " ratio " << r.ratio());
    REQUIRE(r.residual <= 1e-7 * r.scale);
  }
}

TEST_CASE("value is stable under admissible contour deformation") {
  EllipticContext ctx;
  IntegralSpec spec = seeded_spec(63, 0, ctx);
  IntegralSpec inner = spec, outer = spec;
  inner.radius = 0.95;
  outer.radius = 1.05;
  cplx a = wp_integral(inner, ctx).value;
  cplx b = wp_integral(outer, ctx).value;
  REQUIRE(std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(a)));
}

TEST_CASE("measure integrand shift ratio matches the very-well-poised form") {
  EllipticContext ctx = default_ctx();
  Sampler rng(sub_seed(64, "beta", 0));
  std::vector<cplx> t05;
  for (int j = 0; j < 5; ++j) t05.push_back(rng.annulus(0.5, 0.7));
  IntegralSpec spec = balanced_spec(t05, ctx);
  for (int i = 0; i < 6; ++i) {
    cplx x = rng.annulus(0.9, 1.1);
    CheckResult r = wp_ratio_check(x, spec, ctx);
    INFO("x " << x.real() << "+" << x.imag() << "i ratio " << r.ratio());
    REQUIRE(r.pass);
  }
}

TEST_CASE("shift ratio is p-elliptic exactly for balanced parameters") {
  EllipticContext ctx = default_ctx();
  Sampler rng(sub_seed(64, "beta", 1));
  std::vector<cplx> t05;
  for (int j = 0; j < 5; ++j) t05.push_back(rng.annulus(0.5, 0.7));
  IntegralSpec spec = balanced_spec(t05, ctx);
  cplx x = rng.annulus(0.95, 1.05);
  REQUIRE(eh_criterion_check(x, spec, ctx).pass);

  IntegralSpec skew = spec;
  skew.t[0] *= 1.3;
  CheckResult bad = eh_criterion_check(x, skew, ctx);
  REQUIRE(bad.residual > 1e3 * ctx.tol * bad.scale);
}

TEST_CASE("residue ladder follows the series term ratio") {
  EllipticContext ctx;
  IntegralSpec spec = seeded_spec(65, 0, ctx);
  CheckResult r = residue_series_link(spec, 2, ctx);
  REQUIRE(r.residual <= 1e-8 * r.scale);
}

TEST_CASE("parameters outside the disk are rejected") {
  EllipticContext ctx = default_ctx();
  std::vector<cplx> t05 = {cplx{1.25, 0.0}, cplx{0.8, 0.0}, cplx{0.5, 0.1},
                           cplx{0.5, -0.1}, cplx{0.4, 0.0}};
  REQUIRE_THROWS_AS(beta_integral_check(t05, ctx.p, ctx.q, ctx),
                    std::invalid_argument);
}

TEST_CASE("pair products on the reciprocal nome lattice are rejected") {
  EllipticContext ctx;
  ctx.p = {0.3, 0.0};
  ctx.q = {0.6, 0.0};
  IntegralSpec spec;
  spec.p = ctx.p;
  spec.q = ctx.q;
  spec.radius = 1.4;
  double r = 1.0 / std::sqrt(0.6);  // t_0 t_1 = 1/q, inside the wider contour
  spec.t = {cplx{r, 0.0}, cplx{r, 0.0}, cplx{0.3, 0.0}, cplx{0.2, 0.0}};
  REQUIRE_THROWS_AS(spec.require_contour(ctx), std::invalid_argument);
}

TEST_CASE("pairing vanishes on the lattice of the solved parameter") {
  PairingDraw d = pairing_draw(0);
  cplx t5 = d.t5();
  for (const cplx& lam : {t5, 1.0 / t5, d.ctx.q * t5}) {
    CheckResult r = continuous_biorthogonality(d.t05, 0, 1, lam, d.ctx);
    INFO("lambda " << lam.real() << "+" << lam.imag() << "i ratio " << r.ratio());
    REQUIRE(r.pass);
  }
  PairingDraw e = pairing_draw(1);
  CheckResult r = continuous_biorthogonality(e.t05, 0, 1, e.t5(), e.ctx);
  REQUIRE(r.pass);
}

TEST_CASE("pairing does not vanish off the lattice on circular contours") {
  PairingDraw d = pairing_draw(0);
  CheckResult r = continuous_biorthogonality(d.t05, 0, 1, d.t05[3], d.ctx);
  REQUIRE(r.residual > 1e3 * d.ctx.tol * r.scale);
}

TEST_CASE("kernel-weighted measure has nonzero mass") {
  PairingDraw d = pairing_draw(0);
  IntegralSpec spec = balanced_spec(d.t05, d.ctx);
  spec.t[5] = d.t5();  // product-q normalization instead of balanced
  WpIntegrand w(spec, d.ctx);
  cplx lam = d.t05[3];
  auto f = [&](const cplx& x) { return w(x) * theta_pm(lam, x, d.ctx.q, d.ctx); };
  double scale = 0.0;
  for (int j = 0; j < 64; ++j)
    scale = std::max(scale, std::abs(f(std::polar(1.0, 2.0 * pi * j / 64.0))));
  cplx mass = trapezoid_contour(f, 1.0, 64, 8, d.ctx).value;
  REQUIRE(std::abs(mass) > 1e3 * d.ctx.tol * scale);
}

TEST_CASE("pairing rejects equal indices and escaped parameters") {
  PairingDraw d = pairing_draw(0);
  REQUIRE_THROWS_AS(continuous_biorthogonality(d.t05, 1, 1, d.t5(), d.ctx),
                    std::invalid_argument);
  std::vector<cplx> small(5, cplx{0.4, 0.0});
  REQUIRE_THROWS_AS(continuous_biorthogonality(small, 0, 1, cplx{0.5, 0.0}, d.ctx),
                    std::invalid_argument);
}
