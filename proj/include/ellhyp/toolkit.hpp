#pragma once

// Working kit on top of theta: elliptic shifted factorials, the even
// elliptic generator X, interpolation and partial fraction expansions in
// theta form, a determinant evaluation, and contour-based zero/pole counts.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "numerics.hpp"
#include "quadrature.hpp"
#include "theta.hpp"

namespace ellhyp {

// Elliptic shifted factorial (a; q, p)_k = prod_{j=0}^{k-1} theta(a q^j; p).
// Negative k follows the usual convention (a;q,p)_{-k} = 1/(a q^{-k};q,p)_k.
inline cplx efac(const cplx& a, long long k, const cplx& q, const cplx& p,
                 const EllipticContext& ctx) {
  if (k < 0) {
    cplx denom = efac(a * ipow(q, k), -k, q, p, ctx);
    if (denom == cplx{0.0, 0.0})
      throw std::runtime_error("efac: pole (negative index hit the zero lattice)");
    return 1.0 / denom;
  }
  cplx r{1.0, 0.0};
  cplx aq = a;
  for (long long j = 0; j < k; ++j) {
    r *= theta(aq, p, ctx);
    if (r == cplx{0.0, 0.0}) return r;
    aq *= q;
  }
  return r;
}

inline cplx efac(const cplx& a, long long k, const EllipticContext& ctx) {
  return efac(a, k, ctx.q, ctx.p, ctx);
}

inline cplx efac_multi(const std::vector<cplx>& as, long long k, const EllipticContext& ctx) {
  cplx r{1.0, 0.0};
  for (const cplx& a : as) {
    r *= efac(a, k, ctx);
    if (r == cplx{0.0, 0.0}) return r;
  }
  return r;
}

// (a x; q, p)_k (a/x; q, p)_k
inline cplx efac_pm(const cplx& a, const cplx& x, long long k, const EllipticContext& ctx) {
  cplx f = efac(a * x, k, ctx);
  if (f == cplx{0.0, 0.0}) return f;
  return f * efac(a / x, k, ctx);
}

inline cplx efac_pm(const cplx& a, const cplx& x, long long k, const cplx& q, const cplx& p,
                    const EllipticContext& ctx) {
  cplx f = efac(a * x, k, q, p, ctx);
  if (f == cplx{0.0, 0.0}) return f;
  return f * efac(a / x, k, q, p, ctx);
}

// Shifted-factorial algebra: splitting, reversal, negative shifts and nome
// shifts.  Exercised over seeded draws; returns the worst residual seen.
inline CheckResult efac_identity_suite(const EllipticContext& ctx, int trials = 25) {
  ctx.require_valid();
  const cplx q = ctx.q, p = ctx.p;
  CheckResult worst;
  for (int trial = 0; trial < trials; ++trial) {
    Sampler s(sub_seed(ctx.rng_seed, "efac_identity_suite", trial));
    cplx a = s.annulus(0.3, 1.5);
    long long n = s.integer(0, 8), k = s.integer(0, 8), m = s.integer(1, 2);

    // (a)_{n+k} = (a)_n (a q^n)_k
    {
      cplx lhs = efac(a, n + k, ctx);
      cplx rhs = efac(a, n, ctx) * efac(a * ipow(q, n), k, ctx);
      CheckResult c = make_check(lhs, rhs, 0.0, ctx);
      c.witness = {a};
      worst.merge(c);
    }
    // (a)_{n-k} = (-1)^k q^{k(k-1)/2} (a)_n / ((a q^{n-1})^k (q^{1-n}/a)_k)
    {
      cplx lhs = efac(a, n - k, ctx);
      cplx den = ipow(a * ipow(q, n - 1), k) * efac(ipow(q, 1 - n) / a, k, ctx);
      cplx rhs = (k % 2 ? -1.0 : 1.0) * ipow(q, half_falling(k)) * efac(a, n, ctx) / den;
      CheckResult c = make_check(lhs, rhs, 0.0, ctx);
      c.witness = {a};
      worst.merge(c);
    }
    // (a)_k = (-1)^k a^k q^{k(k-1)/2} (q^{1-k}/a)_k
    {
      cplx lhs = efac(a, k, ctx);
      cplx rhs = (k % 2 ? -1.0 : 1.0) * ipow(a, k) * ipow(q, half_falling(k)) *
                 efac(ipow(q, 1 - k) / a, k, ctx);
      worst.merge(make_check(lhs, rhs, 0.0, ctx));
    }
    // (p^m a)_n = (-1)^{mn} (a)_n / (a^{mn} p^{n m(m-1)/2} q^{m n(n-1)/2})
    {
      cplx lhs = efac(ipow(p, m) * a, n, ctx);
      cplx den = ipow(a, m * n) * ipow(p, n * half_falling(m)) * ipow(q, m * half_falling(n));
      cplx rhs = ((m * n) % 2 ? -1.0 : 1.0) * efac(a, n, ctx) / den;
      worst.merge(make_check(lhs, rhs, 0.0, ctx));
    }
    // negative index convention round-trip
    {
      cplx lhs = efac(a, -k, ctx);
      cplx rhs = 1.0 / efac(a * ipow(q, -k), k, ctx);
      worst.merge(make_check(lhs, rhs, 0.0, ctx));
    }
  }
  worst.pass = worst.residual <= ctx.tol * worst.scale;
  return worst;
}

// Even elliptic generator X(x) = theta(a x^+-; p) / theta(b x^+-; p).
// Degenerate when ab or a/b lies on p^Z (the two building blocks then fail
// to generate the field).
inline cplx x_generator(const cplx& x, const cplx& a, const cplx& b,
                        const EllipticContext& ctx) {
  double snap = detail::zero_snap(ctx);
  if (near_power_of(a * b, ctx.p, snap) || near_power_of(a / b, ctx.p, snap))
    throw std::invalid_argument("x_generator: degenerate generator (ab or a/b on p^Z)");
  cplx den = theta_pm(b, x, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("x_generator: evaluation at pole");
  return theta_pm(a, x, ctx) / den;
}

// Difference form X(x) - X(c) as a single theta quotient.
inline cplx x_generator_difference(const cplx& x, const cplx& c, const cplx& a, const cplx& b,
                                   const EllipticContext& ctx) {
  const cplx p = ctx.p;
  cplx num = a * theta_pm(b, a, p, ctx) * theta_pm(c, x, p, ctx);
  cplx den = c * theta_pm(b, c, p, ctx) * theta_pm(b, x, p, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("x_generator_difference: pole");
  return num / den;
}

// Derivative X'(x) in closed form.
inline cplx x_generator_derivative(const cplx& x, const cplx& a, const cplx& b,
                                   const EllipticContext& ctx) {
  const cplx p = ctx.p;
  cplx pp = qpochhammer_inf(p, p, ctx);
  cplx den = x * x * theta_pm(b, x, p, ctx) * theta_pm(b, x, p, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("x_generator_derivative: pole");
  return a * pp * pp * theta_pm(b, a, p, ctx) * theta(x * x, p, ctx) / den;
}

// Lagrange interpolation with theta kernels: reconstructs f at x from its
// values on nodes y_1..y_n, for f in the n-dimensional space with
// multiplier determined by t and the nodes.
inline cplx lagrange_theta_interpolate(const std::vector<cplx>& nodes,
                                       const std::vector<cplx>& values, const cplx& t,
                                       const cplx& x, const EllipticContext& ctx) {
  if (nodes.size() != values.size() || nodes.empty())
    throw std::invalid_argument("lagrange_theta_interpolate: node/value size mismatch");
  const cplx p = ctx.p;
  const std::size_t n = nodes.size();
  cplx theta_t = theta(t, p, ctx);
  if (theta_t == cplx{0.0, 0.0})
    throw std::invalid_argument("lagrange_theta_interpolate: degenerate t");
  KahanSum sum;
  for (std::size_t j = 0; j < n; ++j) {
    cplx term = values[j] * theta(t * x / nodes[j], p, ctx) / theta_t;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      cplx den = theta(nodes[j] / nodes[k], p, ctx);
      if (den == cplx{0.0, 0.0})
        throw std::invalid_argument("lagrange_theta_interpolate: degenerate nodes");
      term *= theta(x / nodes[k], p, ctx) / den;
    }
    sum.add(term);
  }
  return sum.value();
}

struct Sides {
  cplx lhs{0.0, 0.0}, rhs{0.0, 0.0};
  double scale = 1.0;
};

// Partial fraction expansion of prod theta(x/z_k)/theta(x/y_k).
inline Sides partial_fraction_basic(const cplx& x, const std::vector<cplx>& ys,
                                    const std::vector<cplx>& zs, const EllipticContext& ctx) {
  if (ys.size() != zs.size() || ys.empty())
    throw std::invalid_argument("partial_fraction_basic: need |ys| == |zs| >= 1");
  const cplx p = ctx.p;
  const std::size_t n = ys.size();
  cplx Y{1.0, 0.0}, Z{1.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    Y *= ys[k];
    Z *= zs[k];
  }
  Sides out;
  cplx lhs{1.0, 0.0};
  for (std::size_t k = 0; k < n; ++k)
    lhs *= theta(x / zs[k], p, ctx) / theta(x / ys[k], p, ctx);
  out.lhs = lhs;

  cplx tYZ = theta(Y / Z, p, ctx);
  KahanSum sum;
  double term_scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cplx coef{1.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) coef *= theta(ys[j] / zs[k], p, ctx);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      coef /= theta(ys[j] / ys[k], p, ctx);
    }
    cplx term = coef * theta(x * Y / (ys[j] * Z), p, ctx) / (tYZ * theta(x / ys[j], p, ctx));
    term_scale = std::max(term_scale, std::abs(term));
    sum.add(term);
  }
  out.rhs = sum.value();
  out.scale = std::max({1.0, term_scale, std::abs(out.lhs), std::abs(out.rhs)});
  return out;
}

// Vanishing sum over the same coefficients when prod y = prod z.
inline std::pair<cplx, double> partial_fraction_vanishing(const std::vector<cplx>& ys,
                                                          const std::vector<cplx>& zs,
                                                          const EllipticContext& ctx) {
  if (ys.size() != zs.size() || ys.size() < 2)
    throw std::invalid_argument("partial_fraction_vanishing: need |ys| == |zs| >= 2");
  const cplx p = ctx.p;
  const std::size_t n = ys.size();
  KahanSum sum;
  double term_scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cplx term{1.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) term *= theta(ys[j] / zs[k], p, ctx);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      term /= theta(ys[j] / ys[k], p, ctx);
    }
    term_scale = std::max(term_scale, std::abs(term));
    sum.add(term);
  }
  return {sum.value(), std::max(1.0, term_scale)};
}

// Even variant: prod_{k<n} theta(x z_k^+-) / prod_{k<=n} theta(x y_k^+-)
// expanded over poles at the y_j (z list has one entry fewer than y list).
inline Sides partial_fraction_even(const cplx& x, const std::vector<cplx>& ys,
                                   const std::vector<cplx>& zs, const EllipticContext& ctx) {
  if (ys.size() != zs.size() + 1 || zs.empty())
    throw std::invalid_argument("partial_fraction_even: need |ys| == |zs| + 1 >= 2");
  const cplx p = ctx.p;
  Sides out;
  cplx lhs{1.0, 0.0};
  for (const cplx& z : zs) lhs *= theta_pm(x, z, p, ctx);
  for (const cplx& y : ys) lhs /= theta_pm(x, y, p, ctx);
  out.lhs = lhs;

  KahanSum sum;
  double term_scale = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    cplx term{1.0, 0.0};
    for (const cplx& z : zs) term *= theta_pm(ys[j], z, p, ctx);
    term /= theta_pm(x, ys[j], p, ctx);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      if (k == j) continue;
      term /= theta_pm(ys[j], ys[k], p, ctx);
    }
    term_scale = std::max(term_scale, std::abs(term));
    sum.add(term);
  }
  out.rhs = sum.value();
  out.scale = std::max({1.0, term_scale, std::abs(out.lhs), std::abs(out.rhs)});
  return out;
}

// Even vanishing sum: sum_j y_j prod_{k} theta(y_j z_k^+-) /
// prod_{k != j} theta(y_j y_k^+-) = 0 with |zs| == |ys| - 2.
inline std::pair<cplx, double> partial_fraction_even_vanishing(const std::vector<cplx>& ys,
                                                               const std::vector<cplx>& zs,
                                                               const EllipticContext& ctx) {
  if (ys.size() < 2 || ys.size() != zs.size() + 2)
    throw std::invalid_argument("partial_fraction_even_vanishing: need |ys| == |zs| + 2 >= 2");
  const cplx p = ctx.p;
  KahanSum sum;
  double term_scale = 0.0;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    cplx term = ys[j];
    for (const cplx& z : zs) term *= theta_pm(ys[j], z, p, ctx);
    for (std::size_t k = 0; k < ys.size(); ++k) {
      if (k == j) continue;
      term /= theta_pm(ys[j], ys[k], p, ctx);
    }
    term_scale = std::max(term_scale, std::abs(term));
    sum.add(term);
  }
  return {sum.value(), std::max(1.0, term_scale)};
}

// Theta identity splitting an antisymmetrized (2n+2)-fold product over the
// poles theta(a_j x^+-); requires prod a * prod b = 1 (solve the last b).
inline Sides sbt_identity(const cplx& x, const std::vector<cplx>& as,
                          const std::vector<cplx>& bs, const EllipticContext& ctx) {
  const std::size_t n = as.size();
  if (bs.size() != n + 2 || n < 1)
    throw std::invalid_argument("sbt_identity: need |bs| == |as| + 2, |as| >= 1");
  const cplx p = ctx.p;
  cplx prod_a{1.0, 0.0};
  for (const cplx& a : as) prod_a *= a;

  cplx fwd{1.0, 0.0}, bwd{1.0, 0.0};
  for (const cplx& a : as) {
    fwd *= theta(a * x, p, ctx);
    bwd *= theta(a / x, p, ctx);
  }
  for (const cplx& b : bs) {
    fwd *= theta(b * x, p, ctx);
    bwd *= theta(b / x, p, ctx);
  }
  cplx xn1 = ipow(x, static_cast<long long>(n) + 1);
  Sides out;
  out.lhs = fwd / xn1 - bwd * xn1;

  KahanSum sum;
  double term_scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx term{1.0, 0.0};
    for (const cplx& b : bs) term *= theta(as[k] * b, p, ctx);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      term *= theta_pm(as[j], x, p, ctx) / theta(as[k] / as[j], p, ctx);
    }
    term_scale = std::max(term_scale, std::abs(term));
    sum.add(term);
  }
  cplx front = (n % 2 ? -1.0 : 1.0) * x * theta(1.0 / (x * x), p, ctx) / prod_a;
  out.rhs = front * sum.value();
  out.scale = std::max({1.0, term_scale * std::abs(front), std::abs(out.lhs), std::abs(out.rhs)});
  return out;
}

namespace detail {

inline cplx det_gauss(std::vector<std::vector<cplx>> m) {
  const std::size_t n = m.size();
  cplx det{1.0, 0.0};
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == cplx{0.0, 0.0}) return {0.0, 0.0};
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      cplx f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

}  // namespace detail

// det [ theta(t x_i y_j) / theta(x_i y_j) ] against its product closed form.
inline Sides frobenius_determinant(const cplx& t, const std::vector<cplx>& xs,
                                   const std::vector<cplx>& ys, const EllipticContext& ctx) {
  const std::size_t n = xs.size();
  if (ys.size() != n || n == 0)
    throw std::invalid_argument("frobenius_determinant: need |xs| == |ys| >= 1");
  const cplx p = ctx.p;

  std::vector<std::vector<cplx>> m(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cplx den = theta(xs[i] * ys[j], p, ctx);
      if (den == cplx{0.0, 0.0}) throw std::runtime_error("frobenius_determinant: pole");
      m[i][j] = theta(t * xs[i] * ys[j], p, ctx) / den;
    }

  Sides out;
  out.lhs = detail::det_gauss(m);

  cplx prod_all{1.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) prod_all *= theta(xs[i] * ys[j], p, ctx);
  cplx xy{1.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) xy *= xs[i] * ys[i];
  cplx rhs = ipow(theta(t, p, ctx), static_cast<long long>(n) - 1) * theta(t * xy, p, ctx);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      rhs *= xs[j] * ys[j] * theta(xs[i] / xs[j], p, ctx) * theta(ys[i] / ys[j], p, ctx);
  out.rhs = rhs / prod_all;
  out.scale = std::max({1.0, std::abs(out.lhs), std::abs(out.rhs)});
  return out;
}

// Net zero count minus pole count of g on the annulus |p| r < |x| < r,
// by the argument principle on the two boundary circles.  g must be
// analytic and nonzero on both circles.
template <class F>
long long zero_pole_count(F&& g, double r, const EllipticContext& ctx) {
  ctx.require_valid();
  if (ctx.p == cplx{0.0, 0.0})
    throw std::invalid_argument("zero_pole_count: needs a nonzero nome");
  auto logderiv_count = [&](double radius) {
    const double h = 1e-7 * radius;
    auto integrand = [&](const cplx& x) {
      cplx gp = (g(x + cplx{h, 0.0}) - g(x - cplx{h, 0.0})) / (2.0 * h);
      cplx gv = g(x);
      if (gv == cplx{0.0, 0.0}) throw std::runtime_error("zero_pole_count: zero on contour");
      return x * gp / gv;
    };
    EllipticContext qctx = ctx;
    qctx.tol = std::min(ctx.tol, 1e-6);
    return trapezoid_contour(integrand, radius, 64, 8, qctx).value;
  };
  cplx outer = logderiv_count(r);
  cplx inner = logderiv_count(std::abs(ctx.p) * r);
  cplx count = outer - inner;
  double nearest = std::round(count.real());
  if (std::abs(count - cplx{nearest, 0.0}) > 0.1)
    throw std::runtime_error("zero_pole_count: non-integer winding (singularity near contour?)");
  return static_cast<long long>(nearest);
}

// Additive-notation elliptic number [z] = e^{-i pi z} theta(e^{2 pi i z}; e^{2 pi i tau}).
inline cplx elliptic_number(const cplx& z, const cplx& tau, const EllipticContext& ctx) {
  if (!(tau.imag() > 0.0))
    throw std::invalid_argument("elliptic_number: tau must lie in the upper half plane");
  const cplx ipi{0.0, pi};
  cplx nome = std::exp(2.0 * ipi * tau);
  return std::exp(-ipi * z) * theta(std::exp(2.0 * ipi * z), nome, ctx);
}

// Runs the partial fraction family ((epf)-style expansions, their vanishing
// sums, and the antisymmetrized split) across seeded draws for sizes 2..n_max.
inline CheckResult partial_fraction_suite(const EllipticContext& ctx, int n_max = 8,
                                          int trials = 10) {
  ctx.require_valid();
  CheckResult worst;
  for (int n = 2; n <= n_max; ++n) {
    for (int trial = 0; trial < trials; ++trial) {
      Sampler s(sub_seed(ctx.rng_seed, "partial_fraction_suite/n" + std::to_string(n), trial));
      auto draw_vec = [&](int count) {
        std::vector<cplx> v(count);
        for (auto& w : v) w = s.annulus(0.3, 1.5);
        return v;
      };
      cplx x = s.annulus(0.3, 1.5);

      {
        auto ys = draw_vec(n), zs = draw_vec(n);
        Sides sd = partial_fraction_basic(x, ys, zs, ctx);
        CheckResult c = make_check(sd.lhs, sd.rhs, sd.scale, ctx);
        c.witness = {x};
        worst.merge(c);
      }
      {
        auto ys = draw_vec(n), zs = draw_vec(n - 1);
        cplx Y{1.0, 0.0}, Z{1.0, 0.0};
        for (auto& y : ys) Y *= y;
        for (auto& z : zs) Z *= z;
        zs.push_back(Y / Z);  // impose prod y = prod z
        auto [sum, scale] = partial_fraction_vanishing(ys, zs, ctx);
        worst.merge(make_check(sum, {0.0, 0.0}, scale, ctx));
      }
      {
        auto ys = draw_vec(n), zs = draw_vec(n - 1);
        Sides sd = partial_fraction_even(x, ys, zs, ctx);
        worst.merge(make_check(sd.lhs, sd.rhs, sd.scale, ctx));
      }
      {
        auto ys = draw_vec(n), zs = draw_vec(n - 2);
        auto [sum, scale] = partial_fraction_even_vanishing(ys, zs, ctx);
        worst.merge(make_check(sum, {0.0, 0.0}, scale, ctx));
      }
      {
        auto as = draw_vec(n), bs = draw_vec(n + 1);
        cplx prod{1.0, 0.0};
        for (auto& a : as) prod *= a;
        for (auto& b : bs) prod *= b;
        bs.push_back(1.0 / prod);  // constraint prod a * prod b = 1
        Sides sd = sbt_identity(x, as, bs, ctx);
        worst.merge(make_check(sd.lhs, sd.rhs, sd.scale, ctx));
      }
    }
  }
  worst.pass = worst.residual <= ctx.tol * worst.scale;
  return worst;
}

}  // namespace ellhyp
