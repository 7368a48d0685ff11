#pragma once

// Biorthogonal rational functions r_k built from terminating very well
// poised sums, together with the discrete weights and norms entering their
// biorthogonality relation on the geometric node set a q^j.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"
#include "series.hpp"
#include "theta.hpp"
#include "toolkit.hpp"

namespace ellhyp {

// Six parameters tied by ab = q^{-n} and abcdef = q. The dual system swaps
// e and f.
struct BiorthogonalFamily {
  cplx a, b, c, d, e, f;
  long long n = 0;

  BiorthogonalFamily dual() const {
    BiorthogonalFamily g = *this;
    std::swap(g.e, g.f);
    return g;
  }

  void require_valid(const EllipticContext& ctx) const {
    if (n < 0) throw std::invalid_argument("BiorthogonalFamily: negative degree");
    cplx want_ab = ipow(ctx.q, -n);
    if (std::abs(a * b - want_ab) > 1e-10 * std::max(1.0, std::abs(want_ab)))
      throw std::invalid_argument("BiorthogonalFamily: ab != q^{-n}");
    cplx prod = a * b * c * d * e * f;
    if (std::abs(prod - ctx.q) > 1e-10 * std::max(1.0, std::abs(ctx.q)))
      throw std::invalid_argument("BiorthogonalFamily: abcdef != q");
  }
};

// Solve-last construction: b balances the degree constraint, f the product
// constraint.
inline BiorthogonalFamily make_family(const cplx& a, const cplx& c, const cplx& d,
                                      const cplx& e, long long n,
                                      const EllipticContext& ctx) {
  BiorthogonalFamily fam;
  fam.a = a;
  fam.c = c;
  fam.d = d;
  fam.e = e;
  fam.n = n;
  fam.b = ipow(ctx.q, -n) / a;
  fam.f = ctx.q / (fam.a * fam.b * fam.c * fam.d * fam.e);
  fam.require_valid(ctx);
  return fam;
}

// The rational function of X(x), evaluated through the underlying variable:
//   r_k(x) = (ab,ac,ad,1/af;q,p)_k / (aq/e;q,p)_k
//            * V(a/e; ax, a/x, q/be, q/ce, q/de, q^k/ef, q^{-k})
// Even and fully elliptic in x, so it descends to the X-line.
inline SumEval r_fn_eval(long long k, const cplx& x, const BiorthogonalFamily& fam,
                         const EllipticContext& ctx) {
  if (k < 0) throw std::invalid_argument("r_fn: negative index");
  const cplx q = ctx.q;
  const cplx &a = fam.a, &b = fam.b, &c = fam.c, &d = fam.d, &e = fam.e, &f = fam.f;
  cplx num = efac_multi({a * b, a * c, a * d, 1.0 / (a * f)}, k, ctx);
  cplx den = efac(a * q / e, k, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("r_fn: prefactor pole");
  std::vector<cplx> bs = {a * x,          a / x,          q / (b * e), q / (c * e),
                          q / (d * e),    ipow(q, k) / (e * f),        ipow(q, -k)};
  SumEval v = v_sum(a / e, bs, k, ctx);
  cplx pref = num / den;
  return {pref * v.value, std::abs(pref) * v.term_scale};
}

inline cplx r_fn(long long k, const cplx& x, const BiorthogonalFamily& fam,
                 const EllipticContext& ctx) {
  return r_fn_eval(k, x, fam, ctx).value;
}

// Discrete weight at node j; the j-th term of the very well poised sum with
// base point a^2 and parameters ab..af.
inline std::vector<cplx> biorthogonality_weights(const BiorthogonalFamily& fam,
                                                 const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  const cplx &a = fam.a;
  const std::vector<cplx> params = {a * fam.b, a * fam.c, a * fam.d, a * fam.e, a * fam.f};
  cplx a2 = a * a;
  cplx theta_a2 = theta(a2, p, ctx);
  if (theta_a2 == cplx{0.0, 0.0})
    throw std::runtime_error("biorthogonality_weights: theta(a^2) vanishes");
  std::vector<cplx> w;
  w.reserve(fam.n + 1);
  cplx body{1.0, 0.0}, qj{1.0, 0.0}, a2q2j = a2;
  for (long long j = 0; j <= fam.n; ++j) {
    w.push_back(body * theta(a2q2j, p, ctx) / theta_a2);
    if (j == fam.n) break;
    cplx nfac = theta(a2 * qj, p, ctx);
    for (const cplx& u : params) nfac *= theta(u * qj, p, ctx);
    cplx dfac = theta(q * qj, p, ctx);
    for (const cplx& u : params) dfac *= theta(a2 * q / u * qj, p, ctx);
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("biorthogonality_weights: denominator zero at j=" +
                               std::to_string(j));
    body *= q * nfac / dfac;
    qj *= q;
    a2q2j *= q * q;
  }
  return w;
}

// Closed-form norm of r_k in the discrete pairing.
inline cplx biorthogonality_norm(long long k, const BiorthogonalFamily& fam,
                                 const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  const cplx &a = fam.a, &b = fam.b, &c = fam.c, &d = fam.d, &e = fam.e, &f = fam.f;
  cplx head_num = efac_multi({a * a * q, q / (c * d), q / (c * e), q / (d * e)}, fam.n, ctx);
  cplx head_den =
      efac_multi({a * q / c, a * q / d, a * q / e, q / (a * c * d * e)}, fam.n, ctx);
  cplx kfac_num = efac_multi({q, a * b, a * c, a * d, b * c, b * d, c * d}, k, ctx);
  cplx kfac_den = efac(1.0 / (e * f), k, ctx);
  cplx ring = theta(1.0 / (e * f), p, ctx) / theta(ipow(q, 2 * k) / (e * f), p, ctx);
  if (head_den == cplx{0.0, 0.0} || kfac_den == cplx{0.0, 0.0})
    throw std::runtime_error("biorthogonality_norm: pole");
  return head_num / head_den * kfac_num / kfac_den * ring * ipow(q, -k);
}

// Full pairing matrix G_{kl} = sum_j w_j r_k(node j) r~_l(node j), where the
// second family is the e <-> f dual.
inline std::vector<std::vector<cplx>> gram_matrix(const BiorthogonalFamily& fam,
                                                  const EllipticContext& ctx) {
  fam.require_valid(ctx);
  const long long n = fam.n;
  const BiorthogonalFamily dual = fam.dual();
  std::vector<cplx> w = biorthogonality_weights(fam, ctx);

  // r-values at the nodes, both families
  std::vector<std::vector<cplx>> rv(n + 1), rtv(n + 1);
  for (long long k = 0; k <= n; ++k) {
    rv[k].resize(n + 1);
    rtv[k].resize(n + 1);
    for (long long j = 0; j <= n; ++j) {
      cplx node = fam.a * ipow(ctx.q, j);
      rv[k][j] = r_fn(k, node, fam, ctx);
      rtv[k][j] = r_fn(k, node, dual, ctx);
    }
  }

  std::vector<std::vector<cplx>> g(n + 1, std::vector<cplx>(n + 1));
  for (long long k = 0; k <= n; ++k)
    for (long long l = 0; l <= n; ++l) {
      KahanSum sum;
      for (long long j = 0; j <= n; ++j) sum.add(w[j] * rv[k][j] * rtv[l][j]);
      g[k][l] = sum.value();
    }
  return g;
}

// Worst-case residual of the full biorthogonality statement: off-diagonal
// pairings vanish, diagonal ones match the closed-form norms.
inline CheckResult biorthogonality_check(const BiorthogonalFamily& fam,
                                         const EllipticContext& ctx) {
  fam.require_valid(ctx);
  const long long n = fam.n;
  const BiorthogonalFamily dual = fam.dual();
  std::vector<cplx> w = biorthogonality_weights(fam, ctx);

  // r-values with the scale of the sums behind them, so the residual is
  // judged against the magnitudes the pairing actually cancelled.
  std::vector<std::vector<SumEval>> rv(n + 1), rtv(n + 1);
  for (long long k = 0; k <= n; ++k) {
    rv[k].resize(n + 1);
    rtv[k].resize(n + 1);
    for (long long j = 0; j <= n; ++j) {
      cplx node = fam.a * ipow(ctx.q, j);
      rv[k][j] = r_fn_eval(k, node, fam, ctx);
      rtv[k][j] = r_fn_eval(k, node, dual, ctx);
    }
  }

  CheckResult worst;
  for (long long k = 0; k <= n; ++k)
    for (long long l = 0; l <= n; ++l) {
      KahanSum sum;
      double scale = 0.0;
      for (long long j = 0; j <= n; ++j) {
        scale = std::max(scale, std::abs(w[j]) * product_scale(rv[k][j], rtv[l][j]));
        sum.add(w[j] * rv[k][j].value * rtv[l][j].value);
      }
      cplx expect = (k == l) ? biorthogonality_norm(k, fam, ctx) : cplx{0.0, 0.0};
      worst.merge(make_check(sum.value(), expect, scale, ctx));
    }
  return worst;
}

}  // namespace ellhyp
