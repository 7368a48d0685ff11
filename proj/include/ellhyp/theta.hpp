#pragma once

// Multiplicative theta functions and the infinite q-Pochhammer symbol they
// are built from.
//
//   (a; p)_inf = prod_{k>=0} (1 - a p^k)
//   theta(x; p) = (x; p)_inf * (p/x; p)_inf
//
// The infinite product is evaluated as a short head product times an exact
// tail correction
//
//   prod_{j>=N} (1 - a p^j) = exp( - sum_{n>=1} a^n p^{Nn} / (n (1 - p^n)) ),
//
// with N chosen so |a p^N| < 1/2; the tail series then converges at least
// geometrically with ratio 1/2 and is truncated below eps_trunc.

#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>

#include "numerics.hpp"

namespace ellhyp {

namespace detail {

// Zero detection threshold: arguments this close (relatively) to the zero
// set are snapped to an exact zero so that terminating sums terminate.
inline double zero_snap(const EllipticContext& ctx) {
  return std::max(ctx.eps_trunc, 1e-13);
}

}  // namespace detail

// (a; p)_inf.  Returns exactly 0 when a lies on p^{0}, p^{-1}, p^{-2}, ...
// within the snap threshold.
inline cplx qpochhammer_inf(const cplx& a, const cplx& p, const EllipticContext& ctx) {
  double ap = std::abs(p);
  if (!(ap < 1.0)) throw std::invalid_argument("qpochhammer_inf: need |p| < 1");
  if (a == cplx{0.0, 0.0}) return {1.0, 0.0};
  if (p == cplx{0.0, 0.0}) return 1.0 - a;

  if (auto k = near_power_of(a, p, detail::zero_snap(ctx)); k && *k <= 0)
    return {0.0, 0.0};

  // head: factors until |a p^N| < 1/2
  cplx head{1.0, 0.0};
  cplx apj = a;  // a * p^j
  int n_head = 0;
  while (std::abs(apj) >= 0.5) {
    head *= (1.0 - apj);
    apj *= p;
    if (++n_head > 4096)
      throw std::invalid_argument("qpochhammer_inf: argument too large for nome");
  }
  if (head == cplx{0.0, 0.0}) return head;

  // tail: exp(-sum_{n>=1} w^n / (n (1 - p^n))), w = a p^N, |w| < 1/2
  const cplx w = apj;
  const double aw = std::abs(w);
  cplx s{0.0, 0.0};
  cplx wn{1.0, 0.0}, pn{1.0, 0.0};
  for (int n = 1; n <= 2000; ++n) {
    wn *= w;
    pn *= p;
    s += wn / (double(n) * (1.0 - pn));
    // remaining tail is bounded by |w|^{n+1} / ((n+1)(1-|p|)(1-|w|))
    double bound = std::abs(wn) * aw / (double(n + 1) * (1.0 - ap) * (1.0 - aw));
    if (bound < ctx.eps_trunc) break;
  }
  return head * std::exp(-s);
}

// theta(x; p) = (x; p)_inf (p/x; p)_inf.  Vanishes exactly on x in p^Z.
inline cplx theta(const cplx& x, const cplx& p, const EllipticContext& ctx) {
  if (x == cplx{0.0, 0.0}) throw std::invalid_argument("theta: argument zero");
  if (p == cplx{0.0, 0.0}) return 1.0 - x;
  cplx f = qpochhammer_inf(x, p, ctx);
  if (f == cplx{0.0, 0.0}) return f;
  cplx g = qpochhammer_inf(p / x, p, ctx);
  return f * g;
}

inline cplx theta(const cplx& x, const EllipticContext& ctx) { return theta(x, ctx.p, ctx); }

// Laurent series form, normalized by (p;p)_inf:
//   theta(x;p) = (1/(p;p)_inf) sum_{n in Z} (-1)^n p^{n(n-1)/2} x^n.
// Terms are grouped in rings n = -r and n = r+1 which share the p-power
// p^{r(r+1)/2}, so each ring is (-1)^r p^{r(r+1)/2} (x^{-r} - x^{r+1}).
inline cplx theta_series(const cplx& x, const cplx& p, const EllipticContext& ctx) {
  if (x == cplx{0.0, 0.0}) throw std::invalid_argument("theta_series: argument zero");
  double ap = std::abs(p);
  if (!(ap < 1.0)) throw std::invalid_argument("theta_series: need |p| < 1");
  if (p == cplx{0.0, 0.0}) return 1.0 - x;

  cplx sum{0.0, 0.0};
  cplx pr{1.0, 0.0};       // p^{r(r+1)/2}
  cplx pstep{1.0, 0.0};    // p^{r}
  cplx xneg{1.0, 0.0};     // x^{-r}
  cplx xpos = x;           // x^{r+1}
  const cplx xinv = 1.0 / x;
  double sign = 1.0;
  int quiet = 0;
  for (int r = 0; r < 512; ++r) {
    cplx ring = sign * pr * (xneg - xpos);
    sum += ring;
    double bound = std::abs(pr) * (std::abs(xneg) + std::abs(xpos));
    if (bound < ctx.eps_trunc * std::max(1.0, std::abs(sum))) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
    sign = -sign;
    pstep *= p;      // p^{r+1}
    pr *= pstep;     // p^{(r+1)(r+2)/2}
    xneg *= xinv;
    xpos *= x;
  }
  return sum / qpochhammer_inf(p, p, ctx);
}

// theta(ax; p) theta(a/x; p), the ubiquitous x^{+-} pair.
inline cplx theta_pm(const cplx& a, const cplx& x, const cplx& p,
                     const EllipticContext& ctx) {
  cplx f = theta(a * x, p, ctx);
  if (f == cplx{0.0, 0.0}) return f;
  return f * theta(a / x, p, ctx);
}

inline cplx theta_pm(const cplx& a, const cplx& x, const EllipticContext& ctx) {
  return theta_pm(a, x, ctx.p, ctx);
}

// Product over several arguments sharing one nome.
inline cplx theta_multi(std::initializer_list<cplx> xs, const cplx& p,
                        const EllipticContext& ctx) {
  cplx r{1.0, 0.0};
  for (const cplx& x : xs) {
    r *= theta(x, p, ctx);
    if (r == cplx{0.0, 0.0}) return r;
  }
  return r;
}

// Value of theta(p^k x; p) predicted by quasi-periodicity:
//   theta(p^k x; p) = (-1)^k p^{-k(k-1)/2} x^{-k} theta(x; p).
inline cplx quasi_shift(const cplx& x, const cplx& p, long long k,
                        const EllipticContext& ctx) {
  cplx t = theta(x, p, ctx);
  if (t == cplx{0.0, 0.0}) return t;
  cplx factor = ipow(p, -half_falling(k)) * ipow(x, -k);
  if (k & 1) factor = -factor;
  return factor * t;
}

}  // namespace ellhyp
