#pragma once

// The elliptic gamma function as a double infinite product over two nomes,
// with the shift equation, inversion, and factorial quotient built on top.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "theta.hpp"
#include "toolkit.hpp"

namespace ellhyp {

// Truncation ranks for the double product, chosen so both geometric tails
// sit below the working tolerance.
struct GammaGridPlan {
  long long j_max = 0;
  long long k_max = 0;
  double tail_bound = 0.0;
};

namespace detail {

// Smallest rank m with (m+2) r^{m+1} / (1-r)^2 * weight below eps; the
// left side bounds the summed magnitude of all product factors beyond the
// anti-diagonal j+k = m.
inline long long rank_for_tail(double r, double weight, double eps) {
  if (r <= 0.0) return 0;
  double lead = weight / ((1.0 - r) * (1.0 - r));
  long long m = 0;
  double rm1 = r;
  while (double(m + 2) * rm1 * lead >= eps) {
    rm1 *= r;
    if (++m > 100000)
      throw std::invalid_argument("gamma plan: nome too close to the unit circle");
  }
  return m;
}

}  // namespace detail

inline GammaGridPlan make_gamma_plan(double abs_p, double abs_q, double abs_x,
                                     const EllipticContext& ctx) {
  if (!(abs_p < 1.0) || !(abs_q < 1.0))
    throw std::invalid_argument("egamma: need |p| < 1 and |q| < 1");
  double r = std::max(abs_p, abs_q);
  double weight = std::max(abs_x, abs_p * abs_q / std::max(abs_x, 1e-300)) + 1.0;
  double eps = 0.25 * ctx.eps_trunc;
  GammaGridPlan plan;
  long long m = detail::rank_for_tail(r, weight, eps);
  plan.j_max = std::min(m, detail::rank_for_tail(abs_p, weight, eps));
  plan.k_max = std::min(m, detail::rank_for_tail(abs_q, weight, eps));
  plan.tail_bound = eps;
  return plan;
}

// Holds the power tables p^j, q^k for repeated evaluation at fixed nomes;
// the contour integrals call the gamma function hundreds of thousands of
// times at the same (p, q).
class GammaEvaluator {
 public:
  GammaEvaluator(const cplx& p, const cplx& q, const EllipticContext& ctx)
      : p_(p), q_(q), ctx_(ctx) {
    if (!(std::abs(p) < 1.0) || !(std::abs(q) < 1.0))
      throw std::invalid_argument("egamma: need |p| < 1 and |q| < 1");
    pj_.push_back({1.0, 0.0});
    qk_.push_back({1.0, 0.0});
  }

  cplx operator()(const cplx& x) const { return eval(x); }

  cplx eval(const cplx& x) const {
    if (x == cplx{0.0, 0.0}) throw std::invalid_argument("egamma: argument zero");

    // Zeros x = p^{j+1} q^{k+1} snap to an exact 0; poles x = p^{-j} q^{-k}
    // raise.  The scan walks the j-rank and tests only the k-ranks whose
    // modulus can match.
    if (auto hit = lattice_hit(x, +1); hit) return {0.0, 0.0};
    if (auto hit = lattice_hit(x, -1); hit)
      throw std::runtime_error("egamma: gamma pole at rank (" +
                               std::to_string(hit->first) + "," +
                               std::to_string(hit->second) + ")");

    GammaGridPlan plan = make_gamma_plan(std::abs(p_), std::abs(q_), std::abs(x), ctx_);
    grow(plan.j_max + 1, plan.k_max + 1);

    const cplx pq = p_ * q_;
    const cplx inv_x = 1.0 / x;
    cplx num{1.0, 0.0}, den{1.0, 0.0};
    long long m_stop = plan.j_max + plan.k_max;
    for (long long m = 0; m <= m_stop; ++m) {
      long long j_lo = std::max<long long>(0, m - plan.k_max);
      long long j_hi = std::min(m, plan.j_max);
      for (long long j = j_lo; j <= j_hi; ++j) {
        cplx g = pj_[j] * qk_[m - j];
        num *= 1.0 - pq * g * inv_x;
        den *= 1.0 - g * x;
      }
    }
    return num / den;
  }

 private:
  // sign = +1 scans zeros p^{j+1}q^{k+1}, sign = -1 scans poles p^{-j}q^{-k};
  // for each j-rank only the few k-ranks of matching modulus are tested.
  std::optional<std::pair<long long, long long>> lattice_hit(const cplx& x,
                                                             int sign) const {
    const double snap = detail::zero_snap(ctx_);
    const double ap = std::abs(p_), aq = std::abs(q_), ax = std::abs(x);

    if (ap == 0.0 || aq == 0.0) {
      if (sign > 0) return std::nullopt;  // zeros need both nomes alive
      const cplx base = (ap == 0.0) ? q_ : p_;
      if (base == cplx{0.0, 0.0})
        return (std::abs(x - cplx{1.0, 0.0}) <= snap)
                   ? std::optional{std::make_pair(0LL, 0LL)}
                   : std::nullopt;
      cplx xv = x;  // x * base^k
      for (long long k = 0; k <= 64; ++k) {
        if (std::abs(xv - cplx{1.0, 0.0}) <= snap)
          return (ap == 0.0) ? std::make_pair(0LL, k) : std::make_pair(k, 0LL);
        xv *= base;
        if (std::abs(xv) < 0.5) break;
      }
      return std::nullopt;
    }

    // quick modulus rejects: zeros sit in |x| <= |pq|, poles in |x| >= 1
    if (sign > 0 && ax > ap * aq * (1.0 + 2.0 * snap)) return std::nullopt;
    if (sign < 0 && ax < 1.0 - 2.0 * snap) return std::nullopt;

    const double lq = std::log(aq);
    cplx pjv = (sign > 0) ? p_ : cplx{1.0, 0.0};
    for (long long j = 0; j <= 64; ++j) {
      double apj = std::abs(pjv);
      // per-j modulus windows shrink (zeros) or grow (poles) monotonically,
      // so a miss here rules out every larger j as well
      if (sign > 0 && ax > apj * aq * (1.0 + 2.0 * snap)) break;
      if (sign < 0 && ax * apj < 1.0 - 2.0 * snap) break;
      double target = (sign > 0) ? std::log(ax / (apj * aq)) / lq
                                 : std::log(ax * apj) / (-lq);
      long long k0 = (long long)std::llround(target);
      for (long long k = std::max<long long>(0, k0 - 2);
           k <= std::min<long long>(64, k0 + 2); ++k) {
        cplx val = (sign > 0) ? pjv * q_ * ipow(q_, k) : pjv * ipow(q_, k);
        cplx rel = (sign > 0) ? x / val : x * val;
        if (std::abs(rel - cplx{1.0, 0.0}) <= snap) return std::make_pair(j, k);
      }
      pjv *= p_;
    }
    return std::nullopt;
  }

  void grow(long long nj, long long nk) const {
    while ((long long)pj_.size() < nj) pj_.push_back(pj_.back() * p_);
    while ((long long)qk_.size() < nk) qk_.push_back(qk_.back() * q_);
  }

  cplx p_, q_;
  EllipticContext ctx_;
  mutable std::vector<cplx> pj_, qk_;
};

inline cplx egamma(const cplx& x, const cplx& p, const cplx& q,
                   const EllipticContext& ctx) {
  return GammaEvaluator(p, q, ctx).eval(x);
}

inline cplx egamma(const cplx& x, const EllipticContext& ctx) {
  return egamma(x, ctx.p, ctx.q, ctx);
}

// (a;q,p)_n against the gamma quotient Gamma(q^n a) / Gamma(a).
inline CheckResult efac_via_gamma(const cplx& a, long long n,
                                  const EllipticContext& ctx) {
  cplx lhs = efac(a, n, ctx);
  cplx rhs = egamma(ipow(ctx.q, n) * a, ctx) / egamma(a, ctx);
  return make_check(lhs, rhs, 1.0, ctx);
}

// Residue data for contour arguments: (1-x) Gamma(x;p,q) -> this constant
// as x -> 1, equal to 1/((p;p)_inf (q;q)_inf).
inline cplx gamma_residue_constant(const cplx& p, const cplx& q,
                                   const EllipticContext& ctx) {
  return 1.0 / (qpochhammer_inf(p, p, ctx) * qpochhammer_inf(q, q, ctx));
}

// The reflection-style product Gamma(x;p,q) Gamma(q/x;p,q) theta(x;q) is
// invariant under x -> qx; this follows from the shift equation since the
// gamma quotients contribute theta(x;p)/theta(1/x;p) = -x and the theta
// cofactor in nome q contributes exactly -1/x.
inline CheckResult reflection_product_invariance(const cplx& x,
                                                 const EllipticContext& ctx) {
  const cplx q = ctx.q;
  auto fval = [&](const cplx& y) {
    return egamma(y, ctx) * egamma(q / y, ctx) * theta(y, q, ctx);
  };
  return make_check(fval(q * x), fval(x), 1.0, ctx);
}

}  // namespace ellhyp
