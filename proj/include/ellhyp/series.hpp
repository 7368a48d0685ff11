#pragma once

// Terminating elliptic hypergeometric sums: the additive (E) and very well
// poised (V) forms, their summation and transformation laws, elliptic
// binomial coefficients and the connection coefficients built from them,
// indefinite/telescoping sums in one and two bases, and related checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "theta.hpp"
#include "toolkit.hpp"

namespace ellhyp {

inline cplx efac_multi(const std::vector<cplx>& as, long long k, const cplx& q, const cplx& p,
                       const EllipticContext& ctx) {
  cplx r{1.0, 0.0};
  for (const cplx& a : as) {
    r *= efac(a, k, q, p, ctx);
    if (r == cplx{0.0, 0.0}) return r;
  }
  return r;
}

// Quotient of two equal-length theta factorial products, advanced one
// factor pair at a time.  Individual factorials can overflow the double
// range (theta of a tiny argument explodes through its p/x tail) even when
// the quotient is moderate, so num and den are never formed separately.
inline cplx efac_ratio(const std::vector<cplx>& num, const std::vector<cplx>& den,
                       long long k, const EllipticContext& ctx) {
  if (num.size() != den.size())
    throw std::invalid_argument("efac_ratio: need equally many factors");
  const cplx q = ctx.q, p = ctx.p;
  cplx r{1.0, 0.0};
  cplx qj{1.0, 0.0};
  for (long long j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < num.size(); ++i) {
      cplx df = theta(den[i] * qj, p, ctx);
      if (df == cplx{0.0, 0.0})
        throw std::runtime_error("efac_ratio: denominator zero at j=" + std::to_string(j));
      r *= theta(num[i] * qj, p, ctx) / df;
    }
    qj *= q;
  }
  return r;
}

struct SumEval {
  cplx value{0.0, 0.0};
  double term_scale = 1.0;  // max |term|, for residual scaling downstream
  operator cplx() const { return value; }
};

// Terminating series sum_{k=0}^{n} t_k with t_0 = 1 and
//   t_{k+1}/t_k = z * theta(q^{-n+k}) prod theta(a_i q^k)
//              / (theta(q^{k+1}) prod theta(b_i q^k)).
// The q^{-n} numerator parameter is implicit; `num` and `den` hold a_1..a_m
// and b_1..b_m.
struct SeriesSpec {
  std::vector<cplx> num;
  std::vector<cplx> den;
  cplx z{1.0, 0.0};
  long long n = 0;
};

// Balancing q^{-n} a_1..a_m = q b_1..b_m, the condition under which the
// terms are elliptic in the parameters.
inline bool e_balanced(const SeriesSpec& s, const EllipticContext& ctx) {
  cplx pa{1.0, 0.0}, pb{1.0, 0.0};
  for (const cplx& a : s.num) pa *= a;
  for (const cplx& b : s.den) pb *= b;
  cplx lhs = ipow(ctx.q, -s.n) * pa, rhs = ctx.q * pb;
  return std::abs(lhs - rhs) <= 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

inline SumEval e_sum(const SeriesSpec& spec, const EllipticContext& ctx) {
  ctx.require_valid();
  if (spec.num.size() != spec.den.size())
    throw std::invalid_argument("e_sum: parameter lists must have equal length");
  if (spec.n < 0) throw std::invalid_argument("e_sum: negative termination index");
  const cplx q = ctx.q, p = ctx.p;

  SumEval out;
  KahanSum sum;
  cplx term{1.0, 0.0};
  cplx qk{1.0, 0.0};
  cplx qmn = ipow(q, -spec.n);
  double tmax = 1.0;
  for (long long k = 0; k <= spec.n; ++k) {
    sum.add(term);
    tmax = std::max(tmax, std::abs(term));
    if (k == spec.n) break;
    // advance by one step, pairing each numerator factor with a denominator
    // factor so huge individual theta values cancel instead of overflowing
    cplx dhead = theta(q * qk, p, ctx);
    if (dhead == cplx{0.0, 0.0})
      throw std::runtime_error("e_sum: denominator zero at k=" + std::to_string(k));
    cplx ratio = spec.z * theta(qmn * qk, p, ctx) / dhead;
    for (std::size_t i = 0; i < spec.num.size(); ++i) {
      cplx df = theta(spec.den[i] * qk, p, ctx);
      if (df == cplx{0.0, 0.0})
        throw std::runtime_error("e_sum: denominator zero at k=" + std::to_string(k));
      ratio *= theta(spec.num[i] * qk, p, ctx) / df;
    }
    term *= ratio;
    qk *= q;
  }
  out.value = sum.value();
  out.term_scale = tmax;
  return out;
}

// Very well poised terminating sum
//   sum_{k=0}^{nterms} theta(a q^{2k})/theta(a)
//     * (a;q,p)_k prod (b_i;q,p)_k / ((q;q,p)_k prod (aq/b_i;q,p)_k) * q^k.
// Termination must come from the parameter list (one b_i = q^{-nterms} or a
// itself on the lattice); nterms is trusted as given.
inline SumEval v_sum(const cplx& a, const std::vector<cplx>& bs, long long nterms,
                     const EllipticContext& ctx) {
  ctx.require_valid();
  if (nterms < 0) throw std::invalid_argument("v_sum: negative termination index");
  const cplx q = ctx.q, p = ctx.p;
  cplx theta_a = theta(a, p, ctx);
  if (theta_a == cplx{0.0, 0.0}) throw std::runtime_error("v_sum: theta(a) vanishes");

  KahanSum sum;
  double tmax = 0.0;
  // The term body (everything except the well poised head) is advanced by
  // one multiplicative step at a time. Keeping the ratio instead of separate
  // numerator and denominator products avoids overflow: individual theta
  // values can be astronomically large for arguments like q^{-n} at n = 8
  // even while the terms themselves stay moderate.
  cplx body{1.0, 0.0};
  cplx qk{1.0, 0.0};  // q^k
  cplx aq2k = a;      // a q^{2k}
  for (long long k = 0; k <= nterms; ++k) {
    cplx term = body * theta(aq2k, p, ctx) / theta_a;
    sum.add(term);
    tmax = std::max(tmax, std::abs(term));
    if (k == nterms) break;
    cplx nfac = theta(a * qk, p, ctx);
    for (const cplx& b : bs) nfac *= theta(b * qk, p, ctx);
    cplx dfac = theta(q * qk, p, ctx);
    for (const cplx& b : bs) dfac *= theta(a * q / b * qk, p, ctx);
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("v_sum: denominator zero at k=" + std::to_string(k));
    if (nfac == cplx{0.0, 0.0}) {
      // factorial hit the zero lattice; every later term vanishes
      break;
    }
    body *= q * nfac / dfac;
    qk *= q;
    aq2k *= q * q;
  }
  SumEval out;
  out.value = sum.value();
  out.term_scale = std::max(1.0, tmax);
  return out;
}

// Balancing for the very well poised sum with m-4 parameters b_1..b_{m-4}:
// (b_1 ... b_{m-4})^2 = q^{m-7} a^{m-5}.
inline bool v_balanced(const cplx& a, const std::vector<cplx>& bs, const EllipticContext& ctx) {
  long long m = static_cast<long long>(bs.size()) + 4;
  cplx prod{1.0, 0.0};
  for (const cplx& b : bs) prod *= b;
  cplx lhs = prod * prod;
  cplx rhs = ipow(ctx.q, m - 7) * ipow(a, m - 5);
  return std::abs(lhs - rhs) <= 1e-10 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// Reversing the order of summation in a balanced terminating series gives
// an equal series with inverted argument and reflected parameters. The
// prefactor (-z)^n q^{-n(n+1)/2} prod (a_i)_n / prod (b_i)_n relies on the
// balancing condition; without it the k-dependent factors do not cancel.
inline CheckResult e_reversal_check(const SeriesSpec& spec, const EllipticContext& ctx) {
  if (!e_balanced(spec, ctx))
    throw std::invalid_argument("e_reversal_check: series must be balanced");
  const cplx q = ctx.q;
  const long long n = spec.n;
  SumEval direct = e_sum(spec, ctx);

  SeriesSpec flipped;
  flipped.n = n;
  flipped.z = 1.0 / spec.z;
  cplx shift = ipow(q, 1 - n);
  for (const cplx& b : spec.den) flipped.num.push_back(shift / b);
  for (const cplx& a : spec.num) flipped.den.push_back(shift / a);
  SumEval rev = e_sum(flipped, ctx);

  cplx dn = efac_multi(spec.den, n, ctx);
  if (dn == cplx{0.0, 0.0}) throw std::runtime_error("e_reversal_check: prefactor pole");
  cplx pref = ipow(-spec.z, n) * ipow(q, -n * (n + 1) / 2) * efac_multi(spec.num, n, ctx) / dn;
  double scale = std::max(direct.term_scale, std::abs(pref) * rev.term_scale);
  return make_check(direct.value, pref * rev.value, scale, ctx);
}

// Ten-parameter summation: with e = a^2 q^{n+1} / (bcd),
//   V(a; b,c,d,e,q^{-n}) = (aq, aq/bc, aq/bd, aq/cd;q,p)_n
//                        / (aq/b, aq/c, aq/d, aq/bcd;q,p)_n.
inline CheckResult frenkel_turaev(const cplx& a, const cplx& b, const cplx& c, const cplx& d,
                                  long long n, const EllipticContext& ctx) {
  const cplx q = ctx.q;
  cplx e = a * a * ipow(q, n + 1) / (b * c * d);
  SumEval lhs = v_sum(a, {b, c, d, e, ipow(q, -n)}, n, ctx);
  cplx num = efac_multi({a * q, a * q / (b * c), a * q / (b * d), a * q / (c * d)}, n, ctx);
  cplx den = efac_multi({a * q / b, a * q / c, a * q / d, a * q / (b * c * d)}, n, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("frenkel_turaev: closed form pole");
  return make_check(lhs.value, num / den, lhs.term_scale, ctx);
}

// Elliptic binomial coefficient used by the h_n expansion machinery.
inline cplx elliptic_binomial(long long n, long long k, const cplx& a, const cplx& b,
                              const cplx& c, const EllipticContext& ctx) {
  if (k < 0 || k > n) return {0.0, 0.0};
  const cplx q = ctx.q, p = ctx.p;
  cplx front = ipow(q, n - k) * theta(ipow(q, 2 * k - n) * b / c, p, ctx) / theta(b / c, p, ctx);
  cplx num = efac_multi({q, a * b, a * c}, n, ctx) * efac(a / c, k, ctx) *
             efac(a / b, n - k, ctx);
  cplx den = efac(b * c, n, ctx) * efac_multi({q, a * b, q * b / c}, k, ctx) *
             efac_multi({q, a * c, q * c / b}, n - k, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("elliptic_binomial: pole");
  return front * num / den;
}

// Two-term recursion in n: expresses C_k^{n+1} through C_{k-1}^n and C_k^n.
inline CheckResult pascal_recursion_check(long long n, long long k, const cplx& a,
                                          const cplx& b, const cplx& c,
                                          const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  cplx lhs = elliptic_binomial(n + 1, k, a, b, c, ctx);
  cplx t1{0.0, 0.0}, t2{0.0, 0.0};
  if (k >= 1) {
    cplx coef = theta(a * c * ipow(q, 2 * n - k + 1), p, ctx) *
                theta(a * ipow(q, k - 1) / c, p, ctx) /
                (theta(b * c * ipow(q, n), p, ctx) *
                 theta(b * ipow(q, 2 * k - 2 - n) / c, p, ctx));
    t1 = coef * elliptic_binomial(n, k - 1, a, b, c, ctx);
  }
  if (k <= n) {
    cplx coef = b * ipow(q, 2 * k - n) * theta(a * b * ipow(q, n + k), p, ctx) *
                theta(a * ipow(q, n - k) / b, p, ctx) /
                (c * theta(b * c * ipow(q, n), p, ctx) *
                 theta(b * ipow(q, 2 * k - n) / c, p, ctx));
    t2 = coef * elliptic_binomial(n, k, a, b, c, ctx);
  }
  cplx rhs = t1 - t2;
  double scale = std::max({std::abs(t1), std::abs(t2)});
  return make_check(lhs, rhs, scale, ctx);
}

// h_n(x; a) = (a x^{+-}; q, p)_n, the natural degree filtration in X(x).
inline cplx h_poly(long long n, const cplx& x, const cplx& a, const EllipticContext& ctx) {
  return efac_pm(a, x, n, ctx);
}

// Connection coefficients: h_k(x;a) h_{n-k}(x;b) = sum_l R_k^l h_l(x;c) h_{n-l}(x;d).
// Definitional form, a double product of binomial coefficients.
inline cplx rkl_from_binomials(long long k, long long l, const cplx& a, const cplx& b,
                               const cplx& c, const cplx& d, long long n,
                               const EllipticContext& ctx) {
  const cplx q = ctx.q;
  KahanSum sum;
  long long jmax = std::min(k, l);
  for (long long j = 0; j <= jmax; ++j) {
    cplx t = elliptic_binomial(k, j, a, c, b * ipow(q, n - k), ctx) *
             elliptic_binomial(n - j, l - j, b, c * ipow(q, j), d, ctx);
    sum.add(t);
  }
  return sum.value();
}

// Closed form of the same coefficient as a single very well poised sum.
// term_scale carries the largest magnitude met inside that sum so callers
// can report residuals relative to the cancellation actually performed.
inline SumEval rkl_coefficient_eval(long long k, long long l, const cplx& a, const cplx& b,
                                    const cplx& c, const cplx& d, long long n,
                                    const EllipticContext& ctx) {
  if (k < 0 || k > n || l < 0 || l > n) return {{0.0, 0.0}, 0.0};
  const cplx q = ctx.q;
  cplx num = efac(q, n, ctx) * efac_multi({a * c, a / c}, k, ctx) *
             efac_multi({ipow(q, n - l) * b * d, b / d}, l, ctx) *
             efac_multi({b * c, b / c}, n - k, ctx) * efac(b / c, n - l, ctx);
  cplx den = efac_multi({c * d, b / c}, n, ctx) *
             efac_multi({q, b * c, ipow(q, l - n) * c / d}, l, ctx) *
             efac_multi({q, ipow(q, -l) * d / c}, n - l, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("rkl_coefficient: pole");
  std::vector<cplx> bs = {ipow(q, -k),          ipow(q, -l),
                          ipow(q, k - n) * a / b, ipow(q, l - n) * c / d,
                          c * d,                 ipow(q, 1 - n) / (a * b),
                          q * c / b};
  SumEval v = v_sum(ipow(q, -n) * c / b, bs, std::min(k, l), ctx);
  cplx pref = ipow(q, l * (l - n)) * num / den;
  return {pref * v.value, std::abs(pref) * v.term_scale};
}

inline cplx rkl_coefficient(long long k, long long l, const cplx& a, const cplx& b,
                            const cplx& c, const cplx& d, long long n,
                            const EllipticContext& ctx) {
  return rkl_coefficient_eval(k, l, a, b, c, d, n, ctx).value;
}

// Error surrogate for a product of two sums: whichever factor's internal
// terms dominate sets the magnitude the product was cancelled down from.
inline double product_scale(const SumEval& u, const SumEval& v) {
  return std::max(u.term_scale * std::abs(v.value), std::abs(u.value) * v.term_scale);
}

// Swapping the two factors of h_k(x;a) h_{n-k}(x;b) relabels k to n-k; the
// coefficients must agree under the same relabeling.
inline CheckResult rkl_symmetry_check(long long k, long long l, const cplx& a, const cplx& b,
                                      const cplx& c, const cplx& d, long long n,
                                      const EllipticContext& ctx) {
  SumEval lhs = rkl_coefficient_eval(k, l, a, b, c, d, n, ctx);
  SumEval rhs = rkl_coefficient_eval(n - k, l, b, a, c, d, n, ctx);
  return make_check(lhs.value, rhs.value, std::max(lhs.term_scale, rhs.term_scale), ctx);
}

// Composing two changes of basis (a,b) -> (c,d) -> (e,f) equals the direct
// change (a,b) -> (e,f).
inline CheckResult rkl_addition_check(long long k, long long l, const cplx& a, const cplx& b,
                                      const cplx& c, const cplx& d, const cplx& e,
                                      const cplx& f, long long n, const EllipticContext& ctx) {
  SumEval lhs = rkl_coefficient_eval(k, l, a, b, e, f, n, ctx);
  KahanSum sum;
  double tmax = lhs.term_scale;
  for (long long j = 0; j <= n; ++j) {
    SumEval u = rkl_coefficient_eval(k, j, a, b, c, d, n, ctx);
    SumEval v = rkl_coefficient_eval(j, l, c, d, e, f, n, ctx);
    tmax = std::max(tmax, product_scale(u, v));
    sum.add(u.value * v.value);
  }
  return make_check(lhs.value, sum.value(), tmax, ctx);
}

// Changing basis (a,b) -> (c,d) and back must be the identity map.
inline CheckResult rkl_unitarity_check(long long k, long long l, const cplx& a, const cplx& b,
                                       const cplx& c, const cplx& d, long long n,
                                       const EllipticContext& ctx) {
  KahanSum sum;
  double tmax = 0.0;
  for (long long j = 0; j <= n; ++j) {
    SumEval u = rkl_coefficient_eval(k, j, a, b, c, d, n, ctx);
    SumEval v = rkl_coefficient_eval(j, l, c, d, a, b, n, ctx);
    tmax = std::max(tmax, product_scale(u, v));
    sum.add(u.value * v.value);
  }
  cplx expect = (k == l) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
  return make_check(sum.value(), expect, tmax, ctx);
}

// Splitting h_{k_1+k_2}(x;a) h_{n-k_1-k_2}(x;b) across an intermediate basis
// in two stages. The binary flags alpha and beta pick which stage absorbs
// the q-shift of a and b.
inline CheckResult rkl_convolution_check(long long k1, long long k2, long long l, const cplx& a,
                                         const cplx& b, const cplx& c, const cplx& d,
                                         long long n1, long long n2, int alpha, int beta,
                                         const EllipticContext& ctx) {
  const cplx q = ctx.q;
  SumEval lhs = rkl_coefficient_eval(k1 + k2, l, a, b, c, d, n1 + n2, ctx);
  KahanSum sum;
  double tmax = lhs.term_scale;
  for (long long l1 = std::max<long long>(0, l - n2); l1 <= std::min(l, n1); ++l1) {
    SumEval u = rkl_coefficient_eval(k1, l1, a * ipow(q, alpha * k2),
                                     b * ipow(q, beta * (n2 - k2)), c, d, n1, ctx);
    SumEval v = rkl_coefficient_eval(k2, l - l1, a * ipow(q, (1 - alpha) * k1),
                                     b * ipow(q, (1 - beta) * (n1 - k1)), c * ipow(q, l1),
                                     d * ipow(q, n1 - l1), n2, ctx);
    tmax = std::max(tmax, product_scale(u, v));
    sum.add(u.value * v.value);
  }
  return make_check(lhs.value, sum.value(), tmax, ctx);
}

// Transformation relating two very well poised sums with a shifted base
// point lambda = a^2 q / (bcd); requires bcdefg = q^{n+2} a^3, so g is
// solved from the rest.
inline CheckResult bailey_transform(const cplx& a, const cplx& b, const cplx& c, const cplx& d,
                                    const cplx& e, const cplx& f, long long n,
                                    const EllipticContext& ctx) {
  const cplx q = ctx.q;
  cplx g = ipow(q, n + 2) * a * a * a / (b * c * d * e * f);
  cplx lambda = a * a * q / (b * c * d);
  SumEval lhs = v_sum(a, {b, c, d, e, f, g, ipow(q, -n)}, n, ctx);
  SumEval rhs_v = v_sum(lambda,
                        {lambda * b / a, lambda * c / a, lambda * d / a, e, f, g, ipow(q, -n)},
                        n, ctx);
  cplx num = efac_multi({a * q, a * q / (e * f), lambda * q / e, lambda * q / f}, n, ctx);
  cplx den = efac_multi({a * q / e, a * q / f, lambda * q, lambda * q / (e * f)}, n, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("bailey_transform: prefactor pole");
  cplx pref = num / den;
  double scale = std::max(lhs.term_scale, std::abs(pref) * rhs_v.term_scale);
  return make_check(lhs.value, pref * rhs_v.value, scale, ctx);
}

// Second transformation obtained by iterating the first: base point moves to
// q^{-n} g / b.
inline CheckResult bailey_transform_iterated(const cplx& a, const cplx& b, const cplx& c,
                                             const cplx& d, const cplx& e, const cplx& f,
                                             long long n, const EllipticContext& ctx) {
  const cplx q = ctx.q;
  cplx g = ipow(q, n + 2) * a * a * a / (b * c * d * e * f);
  SumEval lhs = v_sum(a, {b, c, d, e, f, g, ipow(q, -n)}, n, ctx);
  SumEval rhs_v = v_sum(ipow(q, -n) * g / b,
                        {ipow(q, -n) * g / a, a * q / (b * c), a * q / (b * d), a * q / (b * e),
                         a * q / (b * f), g, ipow(q, -n)},
                        n, ctx);
  cplx num = ipow(g, n) * efac_multi({a * q, b, a * q / (c * g), a * q / (d * g),
                                      a * q / (e * g), a * q / (f * g)},
                                     n, ctx);
  cplx den = efac_multi({a * q / c, a * q / d, a * q / e, a * q / f, a * q / g, b / g}, n, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("bailey_transform_iterated: pole");
  cplx pref = num / den;
  double scale = std::max(lhs.term_scale, std::abs(pref) * rhs_v.term_scale);
  return make_check(lhs.value, pref * rhs_v.value, scale, ctx);
}

// Indefinite summation: with efgh = a^2 (h solved from e, f, g),
//   sum_{k=0}^n theta(a q^{2k})/theta(a) (e,f,g,h;q,p)_k /
//               (aq/e,aq/f,aq/g,aq/h;q,p)_k q^k
// telescopes to a closed form.
inline CheckResult indefinite_sum_check(const cplx& a, const cplx& e, const cplx& f,
                                        const cplx& g, long long n,
                                        const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  cplx h = a * a / (e * f * g);
  cplx theta_a = theta(a, p, ctx);
  KahanSum sum;
  double tmax = 1.0;
  cplx body{1.0, 0.0}, qk{1.0, 0.0}, aq2k = a;
  const std::vector<cplx> ups{e, f, g, h};
  for (long long k = 0; k <= n; ++k) {
    cplx term = body * theta(aq2k, p, ctx) / theta_a;
    sum.add(term);
    tmax = std::max(tmax, std::abs(term));
    if (k == n) break;
    cplx nfac{1.0, 0.0}, dfac{1.0, 0.0};
    for (const cplx& u : ups) {
      nfac *= theta(u * qk, p, ctx);
      dfac *= theta(a * q / u * qk, p, ctx);
    }
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("indefinite_sum_check: denominator zero at k=" +
                               std::to_string(k));
    body *= q * nfac / dfac;
    qk *= q;
    aq2k *= q * q;
  }

  cplx front = theta_multi({a / e, a / f, a / g, a / (e * f * g)}, p, ctx) /
               theta_multi({a, a / (e * f), a / (e * g), a / (f * g)}, p, ctx);
  cplx tail_num = efac_multi({e, f, g, h}, n + 1, ctx);
  cplx tail_den = efac_multi({a / e, a / f, a / g, a / h}, n + 1, ctx);
  if (tail_den == cplx{0.0, 0.0}) throw std::runtime_error("indefinite_sum_check: pole");
  cplx rhs = front * (1.0 - tail_num / tail_den);
  return make_check(sum.value(), rhs, std::max(tmax, std::abs(front)), ctx);
}

// Telescoping sum over four free sequences a_j, b_j, c_j, d_j:
//   sum_k (a_k/c_k) theta(c_k d_k^pm, b_k a_k^pm)
//         prod_{j<k} theta(a_j d_j^pm, b_j c_j^pm)
//         prod_{j>k} theta(b_j d_j^pm, a_j c_j^pm)
//   = prod_j theta(a_j d_j^pm, b_j c_j^pm) - prod_j theta(b_j d_j^pm, a_j c_j^pm).
inline CheckResult telescoping_check(const std::vector<cplx>& as, const std::vector<cplx>& bs,
                                     const std::vector<cplx>& cs, const std::vector<cplx>& ds,
                                     const EllipticContext& ctx) {
  const std::size_t n1 = as.size();
  if (bs.size() != n1 || cs.size() != n1 || ds.size() != n1 || n1 == 0)
    throw std::invalid_argument("telescoping_check: sequences must share a positive length");
  const cplx p = ctx.p;
  auto ad = [&](std::size_t j) { return theta_pm(as[j], ds[j], p, ctx) * theta_pm(bs[j], cs[j], p, ctx); };
  auto bd = [&](std::size_t j) { return theta_pm(bs[j], ds[j], p, ctx) * theta_pm(as[j], cs[j], p, ctx); };

  // prefix products of the "advanced" factors, suffix products of the rest
  std::vector<cplx> pre(n1 + 1, cplx{1.0, 0.0}), suf(n1 + 1, cplx{1.0, 0.0});
  for (std::size_t j = 0; j < n1; ++j) pre[j + 1] = pre[j] * ad(j);
  for (std::size_t j = n1; j-- > 0;) suf[j] = suf[j + 1] * bd(j);

  KahanSum sum;
  double tmax = 0.0;
  for (std::size_t k = 0; k < n1; ++k) {
    cplx term = as[k] / cs[k] * theta_pm(cs[k], ds[k], p, ctx) *
                theta_pm(bs[k], as[k], p, ctx) * pre[k] * suf[k + 1];
    tmax = std::max(tmax, std::abs(term));
    sum.add(term);
  }
  cplx rhs = pre[n1] - suf[0];
  return make_check(sum.value(), rhs, std::max({tmax, std::abs(pre[n1]), std::abs(suf[0])}), ctx);
}

// Bibasic indefinite sum in bases q and r sharing the nome p.
inline CheckResult bibasic_sum_check(const cplx& a, const cplx& b, const cplx& c, const cplx& d,
                                     const cplx& r, long long n, const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  cplx t_cd = theta(c * d, p, ctx), t_dc = theta(d / c, p, ctx);
  KahanSum sum;
  double tmax = 0.0;
  cplx qk{1.0, 0.0}, rk{1.0, 0.0};
  cplx body{1.0, 0.0};
  for (long long k = 0; k <= n; ++k) {
    cplx head = theta(c * d * qk * rk, p, ctx) * theta(d * rk / (c * qk), p, ctx) /
                (t_cd * t_dc);
    cplx term = head * body;
    tmax = std::max(tmax, std::abs(term));
    sum.add(term);
    if (k == n) break;
    cplx nfac = theta(d * a * rk, p, ctx) * theta(d / a * rk, p, ctx) *
                theta(c * b * qk, p, ctx) * theta(c / b * qk, p, ctx);
    cplx dfac = theta(r * d * b * rk, p, ctx) * theta(r * d / b * rk, p, ctx) *
                theta(q * c * a * qk, p, ctx) * theta(q * c / a * qk, p, ctx);
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("bibasic_sum_check: denominator zero at k=" + std::to_string(k));
    body *= q * nfac / dfac;
    qk *= q;
    rk *= r;
  }

  cplx front = theta_pm(a, c, p, ctx) * theta_pm(d, b, p, ctx) /
               (theta_pm(a, b, p, ctx) * theta_pm(d, c, p, ctx));
  cplx tail = efac_pm(c, b, n + 1, q, p, ctx) * efac_pm(d, a, n + 1, r, p, ctx) /
              (efac_pm(c, a, n + 1, q, p, ctx) * efac_pm(d, b, n + 1, r, p, ctx));
  cplx rhs = front * (1.0 - tail);
  return make_check(sum.value(), rhs, std::max(tmax, std::abs(front)), ctx);
}

// Bibasic Kronecker delta sum: equals 1 at n = 0 and 0 for n >= 1.
inline CheckResult kronecker_sum_check(const cplx& c, const cplx& d, const cplx& r,
                                       long long n, const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  cplx t_cd = theta(c * d, p, ctx), t_dc = theta(d / c, p, ctx);
  KahanSum sum;
  double tmax = 0.0;
  cplx qk{1.0, 0.0}, rk{1.0, 0.0}, body{1.0, 0.0};
  const cplx rn = ipow(r, n);
  for (long long k = 0; k <= n; ++k) {
    cplx head = theta(c * d * qk * rk, p, ctx) * theta(d * rk / (c * qk), p, ctx) /
                (t_cd * t_dc);
    cplx term = head * body;
    tmax = std::max(tmax, std::abs(term));
    sum.add(term);
    if (k == n) break;
    cplx nfac = theta(rk / rn, p, ctx) * theta(rn * d * d * rk, p, ctx) *
                theta(c * d * qk, p, ctx) * theta(c / d * qk, p, ctx);
    cplx dfac = theta(r * rk, p, ctx) * theta(r * d * d * rk, p, ctx) *
                theta(q * rn * c * d * qk, p, ctx) * theta(q / rn * c / d * qk, p, ctx);
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("kronecker_sum_check: denominator zero at k=" + std::to_string(k));
    body *= q * nfac / dfac;
    qk *= q;
    rk *= r;
  }
  cplx expect = (n == 0) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
  return make_check(sum.value(), expect, std::max(1.0, tmax), ctx);
}

// Rational shadow of the telescoping sum. Pushing the sequences through any
// degree-one coordinate X collapses each theta pair to a plain difference of
// values, leaving an unconditional identity of rational functions in the
// images A_j, B_j, C_j, D_j.
inline CheckResult rational_telescoping_check(const std::vector<cplx>& as,
                                              const std::vector<cplx>& bs,
                                              const std::vector<cplx>& cs,
                                              const std::vector<cplx>& ds,
                                              const EllipticContext& ctx) {
  const std::size_t n1 = as.size();
  if (bs.size() != n1 || cs.size() != n1 || ds.size() != n1 || n1 == 0)
    throw std::invalid_argument("rational_telescoping_check: length mismatch");
  std::vector<cplx> pre(n1 + 1, cplx{1.0, 0.0}), suf(n1 + 1, cplx{1.0, 0.0});
  for (std::size_t j = 0; j < n1; ++j)
    pre[j + 1] = pre[j] * (as[j] - ds[j]) * (bs[j] - cs[j]);
  for (std::size_t j = n1; j-- > 0;)
    suf[j] = suf[j + 1] * (bs[j] - ds[j]) * (as[j] - cs[j]);
  KahanSum sum;
  double tmax = 0.0;
  for (std::size_t k = 0; k < n1; ++k) {
    cplx term = (cs[k] - ds[k]) * (bs[k] - as[k]) * pre[k] * suf[k + 1];
    tmax = std::max(tmax, std::abs(term));
    sum.add(term);
  }
  cplx rhs = pre[n1] - suf[0];
  return make_check(sum.value(), rhs, std::max({tmax, std::abs(pre[n1]), std::abs(suf[0])}), ctx);
}

// Quadratic-base summation: bases q and q^2 mixed in one terminating sum,
// with cd = a^2 q^{2n+1} (d solved from c).
inline CheckResult warnaar_quadratic(const cplx& a, const cplx& b, const cplx& c, long long n,
                                     const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  const cplx q2 = q * q;
  cplx d = a * a * ipow(q, 2 * n + 1) / c;
  cplx theta_a = theta(a, p, ctx);

  KahanSum sum;
  double tmax = 0.0;
  cplx body{1.0, 0.0};
  cplx qk{1.0, 0.0}, q2k{1.0, 0.0}, aq3k = a;
  for (long long k = 0; k <= n; ++k) {
    cplx term = body * theta(aq3k, p, ctx) / theta_a;
    tmax = std::max(tmax, std::abs(term));
    sum.add(term);
    if (k == n) break;
    cplx nfac = theta(a * qk, p, ctx) * theta(b * qk, p, ctx) * theta(q / b * qk, p, ctx) *
                theta(c * q2k, p, ctx) * theta(d * q2k, p, ctx) *
                theta(ipow(q, -2 * n) * q2k, p, ctx);
    cplx dfac = theta(a * q / c * qk, p, ctx) * theta(a * q / d * qk, p, ctx) *
                theta(a * ipow(q, 2 * n + 1) * qk, p, ctx) * theta(q2 * q2k, p, ctx) *
                theta(a * q2 / b * q2k, p, ctx) * theta(a * b * q * q2k, p, ctx);
    if (dfac == cplx{0.0, 0.0})
      throw std::runtime_error("warnaar_quadratic: denominator zero at k=" + std::to_string(k));
    body *= q * nfac / dfac;
    qk *= q;
    q2k *= q2;
    aq3k *= q * q2;
  }

  cplx rhs_num = efac(a * q, 2 * n, ctx) *
                 efac_multi({a * b * q / c, a * q2 / (b * c)}, n, q2, p, ctx);
  cplx rhs_den = efac(a * q / c, 2 * n, ctx) * efac_multi({a * b * q, a * q2 / b}, n, q2, p, ctx);
  if (rhs_den == cplx{0.0, 0.0}) throw std::runtime_error("warnaar_quadratic: closed form pole");
  return make_check(sum.value(), rhs_num / rhs_den, tmax, ctx);
}

// Karlsson-Minton style summation: integral parameter differences
// m_1..m_r with n = m_1 + ... + m_r force the series to collapse to a
// finite product.
inline CheckResult minton_sum(const cplx& a, const cplx& b, const std::vector<cplx>& cs,
                              const std::vector<long long>& ms, const EllipticContext& ctx) {
  if (cs.size() != ms.size()) throw std::invalid_argument("minton_sum: |cs| != |ms|");
  const cplx q = ctx.q;
  long long n = 0;
  for (long long m : ms) {
    if (m < 0) throw std::invalid_argument("minton_sum: negative multiplicity");
    n += m;
  }
  std::vector<cplx> bs = {b, a / b, ipow(q, -n)};
  for (std::size_t l = 0; l < cs.size(); ++l) {
    bs.push_back(cs[l] * ipow(q, ms[l]));
    bs.push_back(a * q / cs[l]);
  }
  SumEval lhs = v_sum(a, bs, n, ctx);
  cplx num = efac_multi({q, a * q}, n, ctx);
  cplx den = efac_multi({a * q / b, b * q}, n, ctx);
  for (std::size_t l = 0; l < cs.size(); ++l) {
    num *= efac_multi({cs[l] / b, b * cs[l] / a}, ms[l], ctx);
    den *= efac_multi({cs[l], cs[l] / a}, ms[l], ctx);
  }
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("minton_sum: closed form pole");
  return make_check(lhs.value, num / den, lhs.term_scale, ctx);
}

// Term-wise total ellipticity of the bilateral quotient series: the k-th
// term T_k = z^k prod_j (x_0 x_j;q,p)_k / (x_0/x_j;q,p)_k is invariant under
// x_j -> p^{alpha_j} x_j when sum_{j>=1} alpha_j = 0 and prod_{j>=1} x_j^2 = 1
// (alpha_0 unconstrained).
inline cplx total_ellipticity_term(const cplx& x0, const std::vector<cplx>& xs, const cplx& z,
                                   long long k, const EllipticContext& ctx) {
  cplx t = ipow(z, k);
  for (const cplx& x : xs) {
    cplx den = efac(x0 / x, k, ctx);
    if (den == cplx{0.0, 0.0}) throw std::runtime_error("total_ellipticity_term: pole");
    t *= efac(x0 * x, k, ctx) / den;
  }
  return t;
}

inline CheckResult total_ellipticity_check(const cplx& x0, const std::vector<cplx>& xs,
                                           const cplx& z, long long k, long long alpha0,
                                           const std::vector<long long>& alphas,
                                           const EllipticContext& ctx) {
  if (alphas.size() != xs.size())
    throw std::invalid_argument("total_ellipticity_check: |alphas| != |xs|");
  long long s = 0;
  for (long long al : alphas) s += al;
  if (s != 0) throw std::invalid_argument("total_ellipticity_check: shifts must sum to zero");
  cplx base = total_ellipticity_term(x0, xs, z, k, ctx);
  std::vector<cplx> shifted(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) shifted[j] = ipow(ctx.p, alphas[j]) * xs[j];
  cplx moved = total_ellipticity_term(ipow(ctx.p, alpha0) * x0, shifted, z, k, ctx);
  return make_check(base, moved, 0.0, ctx);
}

// Runs the telescoping family end to end: the theta telescoping sum, its
// bibasic extension, the Kronecker delta evaluation, and the rational
// shadow, each on seeded draws. Returns the worst residual seen.
inline CheckResult telescoping_suite(const EllipticContext& ctx) {
  CheckResult worst;

  {
    Sampler smp(sub_seed(ctx.rng_seed, "telescope-theta", 0));
    std::vector<cplx> as, bs, cs, ds;
    for (int j = 0; j < 8; ++j) {
      as.push_back(smp.annulus(0.3, 1.5));
      bs.push_back(smp.annulus(0.3, 1.5));
      cs.push_back(smp.annulus(0.3, 1.5));
      ds.push_back(smp.annulus(0.3, 1.5));
    }
    worst.merge(telescoping_check(as, bs, cs, ds, ctx));
  }

  {
    EllipticContext bctx = ctx;
    bctx.q = cplx{0.3, 0.0};
    const cplx r{0.45, 0.0};
    Sampler smp(sub_seed(ctx.rng_seed, "telescope-bibasic", 0));
    cplx a = smp.annulus(0.4, 1.3), b = smp.annulus(0.4, 1.3);
    cplx c = smp.annulus(0.4, 1.3), d = smp.annulus(0.4, 1.3);
    worst.merge(bibasic_sum_check(a, b, c, d, r, 5, bctx));
    for (long long n = 0; n <= 4; ++n) {
      cplx cc = smp.annulus(0.4, 1.3), dd = smp.annulus(0.4, 1.3);
      worst.merge(kronecker_sum_check(cc, dd, r, n, bctx));
    }
  }

  {
    Sampler smp(sub_seed(ctx.rng_seed, "telescope-rational", 0));
    std::vector<cplx> as, bs, cs, ds;
    for (int j = 0; j < 8; ++j) {
      as.push_back(smp.annulus(0.3, 1.5));
      bs.push_back(smp.annulus(0.3, 1.5));
      cs.push_back(smp.annulus(0.3, 1.5));
      ds.push_back(smp.annulus(0.3, 1.5));
    }
    worst.merge(rational_telescoping_check(as, bs, cs, ds, ctx));
  }

  return worst;
}

// Composition and two-stage splitting laws for the connection coefficients,
// on seeded draws with small n.
inline CheckResult rkl_addition_convolution_suite(const EllipticContext& ctx) {
  CheckResult worst;
  Sampler smp(sub_seed(ctx.rng_seed, "rkl-suite", 0));
  auto draw = [&] { return smp.annulus(0.3, 1.5); };

  {
    const long long n = 3;
    cplx a = draw(), b = draw(), c = draw(), d = draw(), e = draw(), f = draw();
    for (long long k = 0; k <= n; ++k)
      for (long long l = 0; l <= n; ++l)
        worst.merge(rkl_addition_check(k, l, a, b, c, d, e, f, n, ctx));
  }

  {
    const long long n1 = 2, n2 = 2;
    cplx a = draw(), b = draw(), c = draw(), d = draw();
    for (int alpha = 0; alpha <= 1; ++alpha)
      for (int beta = 0; beta <= 1; ++beta) {
        long long k1 = smp.integer(0, n1), k2 = smp.integer(0, n2);
        long long l = smp.integer(0, n1 + n2);
        worst.merge(
            rkl_convolution_check(k1, k2, l, a, b, c, d, n1, n2, alpha, beta, ctx));
      }
  }

  return worst;
}

// Triangular theta matrices that invert each other; the inversion encodes
// the vanishing partial fraction sums.
inline std::pair<std::vector<std::vector<cplx>>, std::vector<std::vector<cplx>>>
inversion_pair(const std::vector<cplx>& ys, const std::vector<cplx>& zs,
               const EllipticContext& ctx) {
  const std::size_t nsize = ys.size();
  if (zs.size() != nsize || nsize == 0)
    throw std::invalid_argument("inversion_pair: need |ys| == |zs| >= 1");
  const cplx p = ctx.p;
  std::vector<std::vector<cplx>> A(nsize, std::vector<cplx>(nsize, cplx{0.0, 0.0}));
  std::vector<std::vector<cplx>> B = A;
  for (std::size_t i = 0; i < nsize; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx a{1.0, 0.0};
      for (std::size_t k = j; k < i; ++k) a *= theta_pm(ys[j], zs[k], p, ctx);
      for (std::size_t k = j + 1; k <= i; ++k) a /= theta_pm(ys[j], ys[k], p, ctx);
      A[i][j] = a;

      cplx b = ys[i] * theta_pm(ys[j], zs[j], p, ctx);
      for (std::size_t k = j + 1; k <= i; ++k) b *= theta_pm(ys[i], zs[k], p, ctx);
      b /= ys[j] * theta_pm(ys[i], zs[i], p, ctx);
      for (std::size_t k = j; k < i; ++k) b /= theta_pm(ys[i], ys[k], p, ctx);
      B[i][j] = b;
    }
  }
  return {A, B};
}

}  // namespace ellhyp
