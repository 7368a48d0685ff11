#pragma once

// Elliptic height model with unit steps: the six R-matrix entries, triple
// crossing and unitarity checks in coordinate and operator form, theta
// connection vectors, and fused weights obtained as grid partition functions
// that collapse to terminating very well poised sums.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numerics.hpp"
#include "series.hpp"
#include "theta.hpp"
#include "toolkit.hpp"

namespace ellhyp {

// Heights are kept as exponents (a complex base plus exact integer offsets);
// q^height is materialized only inside theta calls. This rounds a difference
// of two heights back to its integer offset.
inline bool integer_diff(const cplx& hi, const cplx& lo, int& out) {
  cplx d = hi - lo;
  double r = std::round(d.real());
  if (std::abs(d.real() - r) > 1e-9 || std::abs(d.imag()) > 1e-9) return false;
  out = static_cast<int>(r);
  return true;
}

// R-matrix entry R^{mn}_{kl}(lambda|u): the upper pair (m,n) labels the
// incoming basis vector, the lower pair (k,l) the outgoing one. All four
// indices lie in {+1,-1} and the entry vanishes unless m+n = k+l.
struct SosWeightKey {
  cplx lambda;
  int m = 1, n = 1;  // incoming pair (upper indices)
  int k = 1, l = 1;  // outgoing pair (lower indices)
  cplx u;            // spectral parameter, the ratio of the two rapidities
};

inline cplx sos_weight(const cplx& lambda, int m, int n, int k, int l,
                       const cplx& u, const EllipticContext& ctx) {
  auto unit = [](int s) { return s == 1 || s == -1; };
  if (!unit(m) || !unit(n) || !unit(k) || !unit(l) || m + n != k + l)
    return {0.0, 0.0};
  if (m == n) return {1.0, 0.0};  // all-plus and all-minus entries
  const cplx q = ctx.q, p = ctx.p;
  // The four remaining entries share the denominator theta(q^{-m lambda}, uq; p):
  // diagonal ones step the height factor by q, exchange ones move it onto u.
  cplx t = qpow(q, -static_cast<double>(m) * lambda);
  cplx den = theta(t, p, ctx) * theta(u * q, p, ctx);
  if (den == cplx{0.0, 0.0}) throw std::runtime_error("weight pole");
  cplx num = (k == m) ? theta(q * t, p, ctx) * theta(u, p, ctx)
                      : theta(q, p, ctx) * theta(t * u, p, ctx);
  return num / den;
}

inline cplx sos_weight(const SosWeightKey& key, const EllipticContext& ctx) {
  return sos_weight(key.lambda, key.m, key.n, key.k, key.l, key.u, ctx);
}

// Weight of one 2x2 block of heights [a b; c d]: the R entry with upper pair
// (c-a, d-c) and lower pair (d-b, b-a) at height a. Blocks whose neighbours
// do not differ by exactly one are inadmissible and weigh zero.
inline cplx block_weight(const cplx& a, const cplx& b, const cplx& c,
                         const cplx& d, const cplx& u, const EllipticContext& ctx) {
  int m, n, k, l;
  if (!integer_diff(c, a, m) || !integer_diff(d, c, n) ||
      !integer_diff(d, b, k) || !integer_diff(b, a, l))
    return {0.0, 0.0};
  return sos_weight(a, m, n, k, l, u, ctx);
}

// Two symmetries of the entries: negating all indices together with the
// height, and transposing the index pairs while reflecting the height
// through -k-l.
inline CheckResult sos_symmetry_check(const cplx& lambda, const cplx& u,
                                      const EllipticContext& ctx) {
  CheckResult out;
  for (int m : {-1, 1})
    for (int n : {-1, 1})
      for (int k : {-1, 1})
        for (int l : {-1, 1}) {
          if (m + n != k + l) continue;
          cplx base = sos_weight(lambda, m, n, k, l, u, ctx);
          cplx flip = sos_weight(-lambda, -m, -n, -k, -l, u, ctx);
          cplx rev = sos_weight(-lambda - static_cast<double>(k + l), n, m, l, k,
                                u, ctx);
          out.merge(make_check(base, flip, 0.0, ctx));
          out.merge(make_check(base, rev, 0.0, ctx));
        }
  return out;
}

// One side of the triple-crossing relation for a fixed index tuple
// (i,j,k,l,m,n), summed over the internal index. `term_scale` collects the
// largest term magnitude for residual scaling.
inline cplx yang_baxter_side(bool left, int i, int j, int k, int l, int m, int n,
                             const cplx& lambda, const cplx& u, const cplx& v,
                             const cplx& w, const EllipticContext& ctx,
                             double* term_scale = nullptr) {
  KahanSum sum;
  for (int x : {-1, 1}) {
    cplx t;
    if (left)
      t = sos_weight(lambda + static_cast<double>(n), l + m - x, x, l, m, u / v, ctx) *
          sos_weight(lambda, i, j + k - x, l + m - x, n, u / w, ctx) *
          sos_weight(lambda + static_cast<double>(i), j, k, x, j + k - x, v / w, ctx);
    else
      t = sos_weight(lambda, x, m + n - x, m, n, v / w, ctx) *
          sos_weight(lambda + static_cast<double>(x), i + j - x, k, l, m + n - x, u / w, ctx) *
          sos_weight(lambda, i, j, i + j - x, x, u / v, ctx);
    if (term_scale) *term_scale = std::max(*term_scale, std::abs(t));
    sum.add(t);
  }
  return sum.value();
}

// The full triple-crossing relation: both sides for every index tuple with
// matching total, twenty cases, worst residual wins.
inline CheckResult yang_baxter_check(const cplx& lambda, const cplx& u,
                                     const cplx& v, const cplx& w,
                                     const EllipticContext& ctx) {
  CheckResult out;
  for (int i : {-1, 1})
    for (int j : {-1, 1})
      for (int k : {-1, 1})
        for (int l : {-1, 1})
          for (int m : {-1, 1})
            for (int n : {-1, 1}) {
              if (i + j + k != l + m + n) continue;
              double tmax = 0.0;
              cplx lhs = yang_baxter_side(true, i, j, k, l, m, n, lambda, u, v, w,
                                          ctx, &tmax);
              cplx rhs = yang_baxter_side(false, i, j, k, l, m, n, lambda, u, v, w,
                                          ctx, &tmax);
              out.merge(make_check(lhs, rhs, tmax, ctx));
            }
  return out;
}

// The only index tuple whose triple-crossing relation has two terms on each
// side, written out as explicit theta quotients.
inline CheckResult four_term_identity(const cplx& lambda, const cplx& u,
                                      const cplx& v, const cplx& w,
                                      const EllipticContext& ctx) {
  const cplx q = ctx.q, p = ctx.p;
  cplx ql = qpow(q, lambda);
  cplx t3 = ipow(theta(q, p, ctx), 3);
  cplx lhs1 = t3 * theta_multi({q * ql * u / v, u / (ql * w), q * ql * v / w}, p, ctx) /
              theta_multi({q * ql, u * q / v, 1.0 / ql, u * q / w, q * ql, v * q / w}, p, ctx);
  cplx lhs2 = theta_multi({1.0 / ql, u / v, q * q * ql, v / w}, p, ctx) /
              theta_multi({1.0 / (q * ql), u * q / v, q * ql, v * q / w}, p, ctx);
  cplx rhs1 = t3 * theta_multi({v / (ql * w), q * ql * u / w, u / (ql * v)}, p, ctx) /
              theta_multi({1.0 / ql, v * q / w, q * ql, u * q / w, 1.0 / ql, u * q / v}, p, ctx);
  cplx rhs2 = theta_multi({q * ql, v / w, q / ql, u / v}, p, ctx) /
              theta_multi({ql, v * q / w, 1.0 / ql, u * q / v}, p, ctx);
  double tmax = std::max({std::abs(lhs1), std::abs(lhs2), std::abs(rhs1),
                          std::abs(rhs2)});
  return make_check(lhs1 + lhs2, rhs1 + rhs2, tmax, ctx);
}

// Two consecutive crossings with swapped rapidities cancel:
// sum_x W(d,x;c,b|u/v) W(d,a;x,b|v/u) is 1 for a = c and 0 otherwise.
inline CheckResult unitarity_check(const cplx& lambda, const cplx& u,
                                   const cplx& v, const EllipticContext& ctx) {
  CheckResult out;
  const cplx d = lambda;
  for (int db : {-2, 0, 2}) {
    cplx b = d + static_cast<double>(db);
    for (int da : {-1, 1})
      for (int dc : {-1, 1}) {
        cplx a = d + static_cast<double>(da);
        cplx c = d + static_cast<double>(dc);
        if (std::abs(da - db) > 1 || std::abs(dc - db) > 1) continue;
        KahanSum sum;
        double tmax = 0.0;
        for (int dx : {-1, 1}) {
          cplx x = d + static_cast<double>(dx);
          cplx t = block_weight(d, x, c, b, u / v, ctx) *
                   block_weight(d, a, x, b, v / u, ctx);
          tmax = std::max(tmax, std::abs(t));
          sum.add(t);
        }
        cplx want = (da == dc) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
        out.merge(make_check(sum.value(), want, tmax, ctx));
      }
  }
  return out;
}

// Dense matrices for the operator forms: 4x4 on the tensor square, 8x8 on
// the tensor cube. Basis pairs are ordered (+,+), (+,-), (-,+), (-,-).
using RMatrix = std::array<std::array<cplx, 4>, 4>;
using RCube = std::array<std::array<cplx, 8>, 8>;

template <typename Mat>
inline Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out{};
  const std::size_t d = a.size();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      if (a[i][k] == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < d; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  return out;
}

inline int sign_bit(int s) { return s == 1 ? 0 : 1; }

// Matrix of R(lambda|u,v) on the tensor square; columns are indexed by the
// incoming pair, rows by the outgoing one.
inline RMatrix r_operator(const cplx& lambda, const cplx& u, const cplx& v,
                          const EllipticContext& ctx) {
  RMatrix out{};
  const int signs[2] = {1, -1};
  for (int mi = 0; mi < 2; ++mi)
    for (int ni = 0; ni < 2; ++ni)
      for (int ki = 0; ki < 2; ++ki)
        for (int li = 0; li < 2; ++li) {
          int m = signs[mi], n = signs[ni], k = signs[ki], l = signs[li];
          if (m + n != k + l) continue;
          out[2 * ki + li][2 * mi + ni] = sos_weight(lambda, m, n, k, l, u / v, ctx);
        }
  return out;
}

// R(lambda + h_dyn|u,v) acting on tensor slots (s1, s2) of the cube; dyn
// names the spectator slot whose grading shifts the height, dyn < 0 disables
// the shift.
inline RCube r_embedded(int s1, int s2, int dyn, const cplx& lambda,
                        const cplx& u, const cplx& v, const EllipticContext& ctx) {
  RCube out{};
  const int signs[2] = {1, -1};
  for (int in = 0; in < 8; ++in) {
    int is[3] = {signs[(in >> 2) & 1], signs[(in >> 1) & 1], signs[in & 1]};
    cplx shifted = lambda;
    if (dyn >= 0) shifted += static_cast<double>(is[dyn]);
    for (int ki = 0; ki < 2; ++ki)
      for (int li = 0; li < 2; ++li) {
        int k = signs[ki], l = signs[li];
        if (is[s1] + is[s2] != k + l) continue;
        int os[3] = {is[0], is[1], is[2]};
        os[s1] = k;
        os[s2] = l;
        int o = (sign_bit(os[0]) << 2) | (sign_bit(os[1]) << 1) | sign_bit(os[2]);
        out[o][in] = sos_weight(shifted, is[s1], is[s2], k, l, u / v, ctx);
      }
  }
  return out;
}

// Coordinate-free form of the triple-crossing relation on the tensor cube,
// compared entry by entry.
inline CheckResult felder_check(const cplx& lambda, const cplx& u, const cplx& v,
                                const cplx& w, const EllipticContext& ctx) {
  RCube lhs = mat_mul(mat_mul(r_embedded(0, 1, 2, lambda, u, v, ctx),
                              r_embedded(0, 2, -1, lambda, u, w, ctx)),
                      r_embedded(1, 2, 0, lambda, v, w, ctx));
  RCube rhs = mat_mul(mat_mul(r_embedded(1, 2, -1, lambda, v, w, ctx),
                              r_embedded(0, 2, 1, lambda, u, w, ctx)),
                      r_embedded(0, 1, -1, lambda, u, v, ctx));
  CheckResult out;
  for (int in = 0; in < 8; ++in)
    for (int o = 0; o < 8; ++o) out.merge(make_check(lhs[o][in], rhs[o][in], 0.0, ctx));
  return out;
}

// Every matrix element of the contracted operator products must reproduce
// the corresponding summed coordinate form.
inline CheckResult felder_matches_coordinates(const cplx& lambda, const cplx& u,
                                              const cplx& v, const cplx& w,
                                              const EllipticContext& ctx) {
  RCube lhs = mat_mul(mat_mul(r_embedded(0, 1, 2, lambda, u, v, ctx),
                              r_embedded(0, 2, -1, lambda, u, w, ctx)),
                      r_embedded(1, 2, 0, lambda, v, w, ctx));
  RCube rhs = mat_mul(mat_mul(r_embedded(1, 2, -1, lambda, v, w, ctx),
                              r_embedded(0, 2, 1, lambda, u, w, ctx)),
                      r_embedded(0, 1, -1, lambda, u, v, ctx));
  CheckResult out;
  const int signs[2] = {1, -1};
  for (int in = 0; in < 8; ++in)
    for (int o = 0; o < 8; ++o) {
      int i = signs[(in >> 2) & 1], j = signs[(in >> 1) & 1], k = signs[in & 1];
      int l = signs[(o >> 2) & 1], m = signs[(o >> 1) & 1], n = signs[o & 1];
      if (i + j + k != l + m + n) continue;
      cplx cl = yang_baxter_side(true, i, j, k, l, m, n, lambda, u, v, w, ctx);
      cplx cr = yang_baxter_side(false, i, j, k, l, m, n, lambda, u, v, w, ctx);
      out.merge(make_check(lhs[o][in], cl, 0.0, ctx));
      out.merge(make_check(rhs[o][in], cr, 0.0, ctx));
    }
  return out;
}

// Operator form of unitarity: the crossing composed with its rapidity-swapped
// partner conjugated by the flip of tensor factors is the identity.
inline CheckResult unitarity_operator_check(const cplx& lambda, const cplx& u,
                                            const cplx& v, const EllipticContext& ctx) {
  RMatrix a = r_operator(lambda, u, v, ctx);
  RMatrix b = r_operator(lambda, v, u, ctx);
  auto flip = [](int i) { return ((i & 1) << 1) | (i >> 1); };
  RMatrix bs{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) bs[flip(i)][flip(j)] = b[i][j];
  RMatrix prod = mat_mul(a, bs);
  CheckResult out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx want = (i == j) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
      out.merge(make_check(prod[i][j], want, 0.0, ctx));
    }
  return out;
}

// Connection vector phi(a,c|u)(x) = theta(q^{a(c-a)/2} su x^{+-}; p) divided
// by q^{a(c-a)/2} su, with su a chosen square root of u. Identity checks
// shift u by integer powers of q and thread su q^{j/2}, keeping every factor
// on one branch.
inline cplx phi_height(const cplx& a, const cplx& c, const cplx& sqrt_u,
                       const cplx& x, const EllipticContext& ctx) {
  int step;
  if (!integer_diff(c, a, step) || (step != 1 && step != -1))
    throw std::invalid_argument("inadmissible heights");
  cplx g = qpow(ctx.q, 0.5 * static_cast<double>(step) * a) * sqrt_u;
  return theta_pm(g, x, ctx.p, ctx) / g;
}

inline cplx phi(const cplx& a, const cplx& c, const cplx& u, const cplx& x,
                const EllipticContext& ctx) {
  return phi_height(a, c, std::sqrt(u), x, ctx);
}

// M-step connection vector in closed form: the ordered product of unit-step
// vectors along any admissible path collapses to two ascending ladders with
// a height-squared q-power in front.
inline cplx phi_fused(long long M, const cplx& a, const cplx& c,
                      const cplx& sqrt_u, const cplx& x, const EllipticContext& ctx) {
  int diff;
  if (M < 1 || !integer_diff(c, a, diff) || std::abs(diff) > M ||
      (M - diff) % 2 != 0)
    throw std::invalid_argument("inadmissible heights");
  long long up = (M + diff) / 2, down = (M - diff) / 2;
  const cplx q = ctx.q;
  double dm = static_cast<double>(M);
  cplx pref = qpow(q, 0.25 * (a * a - c * c + dm * dm)) / ipow(sqrt_u, M);
  cplx lead = qpow(q, 0.5 * (1.0 - dm + a)) * sqrt_u;
  cplx trail = qpow(q, 0.5 * (1.0 - dm - a)) * sqrt_u;
  return pref * efac_pm(lead, x, up, ctx) * efac_pm(trail, x, down, ctx);
}

inline cplx phi_m(long long M, const cplx& a, const cplx& c, const cplx& u,
                  const cplx& x, const EllipticContext& ctx) {
  return phi_fused(M, a, c, std::sqrt(u), x, ctx);
}

// The same quantity as an explicit ordered product over a +-1 step path; the
// r-th factor of M carries the parameter u q^{r-M}.
inline cplx phi_fused_path(const cplx& a, const std::vector<int>& steps,
                           const cplx& sqrt_u, const cplx& x,
                           const EllipticContext& ctx) {
  long long M = static_cast<long long>(steps.size());
  cplx prod{1.0, 0.0};
  cplx h = a;
  for (long long r = 1; r <= M; ++r) {
    cplx su = sqrt_u * qpow(ctx.q, 0.5 * static_cast<double>(r - M));
    cplx next = h + static_cast<double>(steps[static_cast<std::size_t>(r - 1)]);
    prod *= phi_height(h, next, su, x, ctx);
    h = next;
  }
  return prod;
}

// Two-step products with staggered parameters do not depend on the middle
// height.
inline CheckResult pil_check(const cplx& a, const cplx& u, const cplx& x,
                             const EllipticContext& ctx, cplx sqrt_u = {0.0, 0.0}) {
  if (sqrt_u == cplx{0.0, 0.0}) sqrt_u = std::sqrt(u);
  cplx sq = sqrt_u * qpow(ctx.q, -0.5);
  cplx up = phi_height(a, a + 1.0, sq, x, ctx) * phi_height(a + 1.0, a, sqrt_u, x, ctx);
  cplx dn = phi_height(a, a - 1.0, sq, x, ctx) * phi_height(a - 1.0, a, sqrt_u, x, ctx);
  return make_check(up, dn, 0.0, ctx);
}

// One-step expansion: phi(b,d|u) expands over the two blocks with bottom-left
// corner a +- 1 and coefficients given by block weights.
inline CheckResult gbe_check(const cplx& a, const cplx& b, const cplx& d,
                             const cplx& u, const cplx& x, const EllipticContext& ctx,
                             cplx sqrt_u = {0.0, 0.0}) {
  if (sqrt_u == cplx{0.0, 0.0}) sqrt_u = std::sqrt(u);
  cplx lhs = phi_height(b, d, sqrt_u, x, ctx);
  cplx sq = sqrt_u * qpow(ctx.q, 0.5);
  KahanSum rhs;
  double tmax = 0.0;
  for (int j : {-1, 1}) {
    cplx c = a + static_cast<double>(j);
    cplx t = block_weight(a, b, c, d, u, ctx) * phi_height(a, c, sq, x, ctx);
    tmax = std::max(tmax, std::abs(t));
    rhs.add(t);
  }
  return make_check(lhs, rhs.value(), tmax, ctx);
}

// Rectangular block of crossings: row rapidities rise by a factor q going
// down, column rapidities rise going right, so the crossing in row i and
// column j (1-based from the top left) sees the ratio q^{(i-M)-(j-N)} u.
// The label u is anchored at the bottom-right crossing; with this choice the
// same u threads uniformly through the fused expansion identities whatever
// the two multiplicities are. The corners and the top and right boundary
// paths are fixed (the value does not depend on the path choice); all other
// heights are summed.
struct FusedWeightSpec {
  long long M = 1, N = 1;
  cplx a, b, c, d;  // corners: top-left, top-right, bottom-left, bottom-right
  cplx u;
  std::vector<int> top_steps;    // N unit steps from a to b; empty = ascents first
  std::vector<int> right_steps;  // M unit steps from b to d; empty = ascents first
};

inline std::vector<int> canonical_steps(long long len, int diff) {
  if (std::abs(diff) > len || (len - diff) % 2 != 0)
    throw std::invalid_argument("inadmissible heights");
  std::vector<int> s(static_cast<std::size_t>(len), -1);
  std::fill(s.begin(), s.begin() + static_cast<std::ptrdiff_t>((len + diff) / 2), 1);
  return s;
}

inline bool fused_admissible(const FusedWeightSpec& spec) {
  int ab, ac, bd, cd;
  return spec.M >= 1 && spec.N >= 1 &&
         integer_diff(spec.b, spec.a, ab) && integer_diff(spec.c, spec.a, ac) &&
         integer_diff(spec.d, spec.b, bd) && integer_diff(spec.d, spec.c, cd) &&
         std::abs(ab) <= spec.N && (spec.N - ab) % 2 == 0 &&
         std::abs(cd) <= spec.N && (spec.N - cd) % 2 == 0 &&
         std::abs(ac) <= spec.M && (spec.M - ac) % 2 == 0 &&
         std::abs(bd) <= spec.M && (spec.M - bd) % 2 == 0;
}

namespace detail {

// Boundary steps from the spec, or the canonical ascent-first path.
inline std::vector<int> boundary_steps(const std::vector<int>& given,
                                       long long len, int diff) {
  if (given.empty()) return canonical_steps(len, diff);
  if (static_cast<long long>(given.size()) != len)
    throw std::invalid_argument("inadmissible heights");
  int sum = 0;
  for (int s : given) {
    if (s != 1 && s != -1) throw std::invalid_argument("inadmissible heights");
    sum += s;
  }
  if (sum != diff) throw std::invalid_argument("inadmissible heights");
  return given;
}

}  // namespace detail

// Partition function of the grid by dynamic programming over whole rows.
// A candidate row is any +-1 walk ending on the fixed right boundary value;
// the final row must also start at the bottom-left corner.
inline cplx fused_weight(const FusedWeightSpec& spec, const EllipticContext& ctx) {
  if (!fused_admissible(spec)) throw std::invalid_argument("inadmissible heights");
  const long long M = spec.M, N = spec.N;
  int ab, bd, ca;
  integer_diff(spec.b, spec.a, ab);
  integer_diff(spec.d, spec.b, bd);
  integer_diff(spec.c, spec.a, ca);
  std::vector<int> top = detail::boundary_steps(spec.top_steps, N, ab);
  std::vector<int> right = detail::boundary_steps(spec.right_steps, M, bd);

  std::vector<cplx> row0(static_cast<std::size_t>(N) + 1);
  row0[0] = spec.a;
  for (long long j = 0; j < N; ++j)
    row0[j + 1] = row0[j] + static_cast<double>(top[static_cast<std::size_t>(j)]);

  std::vector<std::pair<std::vector<cplx>, cplx>> layer = {{row0, cplx{1.0, 0.0}}};
  cplx right_end = spec.b;
  for (long long i = 1; i <= M; ++i) {
    right_end += static_cast<double>(right[static_cast<std::size_t>(i - 1)]);
    std::vector<std::pair<std::vector<cplx>, cplx>> next;
    for (long long mask = 0; mask < (1LL << N); ++mask) {
      std::vector<cplx> row(static_cast<std::size_t>(N) + 1);
      row[static_cast<std::size_t>(N)] = right_end;
      for (long long j = N - 1; j >= 0; --j) {
        int step = (mask >> j) & 1 ? 1 : -1;
        row[j] = row[j + 1] - static_cast<double>(step);
      }
      if (i == M && std::abs(row[0] - spec.c) > 1e-9) continue;
      cplx acc{0.0, 0.0};
      for (const auto& [prev, val] : layer) {
        cplx t = val;
        for (long long j = 1; j <= N && t != cplx{0.0, 0.0}; ++j)
          t *= block_weight(prev[j - 1], prev[j], row[j - 1], row[j],
                            ipow(ctx.q, (i - M) - (j - N)) * spec.u, ctx);
        acc += t;
      }
      if (acc != cplx{0.0, 0.0}) next.emplace_back(std::move(row), acc);
    }
    layer = std::move(next);
    if (layer.empty()) return {0.0, 0.0};
  }
  KahanSum total;
  for (const auto& [row, val] : layer) total.add(val);
  return total.value();
}

// Independent oracle for small blocks: every free cell is enumerated
// directly, constrained only by its upper neighbour, and the full product of
// block weights is accumulated. Exponential in the grid size.
inline cplx fused_weight_enumerated(const FusedWeightSpec& spec,
                                    const EllipticContext& ctx) {
  if (!fused_admissible(spec)) throw std::invalid_argument("inadmissible heights");
  const long long M = spec.M, N = spec.N;
  int ab, bd;
  integer_diff(spec.b, spec.a, ab);
  integer_diff(spec.d, spec.b, bd);
  std::vector<int> top = detail::boundary_steps(spec.top_steps, N, ab);
  std::vector<int> right = detail::boundary_steps(spec.right_steps, M, bd);

  std::vector<std::vector<cplx>> g(static_cast<std::size_t>(M) + 1,
                                   std::vector<cplx>(static_cast<std::size_t>(N) + 1));
  g[0][0] = spec.a;
  for (long long j = 0; j < N; ++j)
    g[0][j + 1] = g[0][j] + static_cast<double>(top[static_cast<std::size_t>(j)]);
  for (long long i = 0; i < M; ++i)
    g[i + 1][N] = g[i][N] + static_cast<double>(right[static_cast<std::size_t>(i)]);
  g[M][0] = spec.c;

  std::vector<std::pair<long long, long long>> free_cells;
  for (long long i = 1; i <= M; ++i)
    for (long long j = 0; j < N; ++j)
      if (!(i == M && j == 0)) free_cells.emplace_back(i, j);

  KahanSum total;
  auto weight_product = [&]() {
    cplx prod{1.0, 0.0};
    for (long long i = 1; i <= M && prod != cplx{0.0, 0.0}; ++i)
      for (long long j = 1; j <= N; ++j)
        prod *= block_weight(g[i - 1][j - 1], g[i - 1][j], g[i][j - 1], g[i][j],
                             ipow(ctx.q, (i - M) - (j - N)) * spec.u, ctx);
    return prod;
  };
  std::function<void(std::size_t)> walk = [&](std::size_t cell) {
    if (cell == free_cells.size()) {
      total.add(weight_product());
      return;
    }
    auto [i, j] = free_cells[cell];
    for (int s : {-1, 1}) {
      g[i][j] = g[i - 1][j] + static_cast<double>(s);
      walk(cell + 1);
    }
  };
  walk(0);
  return total.value();
}

// Fused expansion: the M-step vector at (b,d) expands over bottom-left
// corners with fused block coefficients and N-fold shifted M-step vectors.
inline CheckResult fbt_check(long long M, long long N, const cplx& a, const cplx& b,
                             const cplx& d, const cplx& u, const cplx& x,
                             const EllipticContext& ctx, cplx sqrt_u = {0.0, 0.0}) {
  if (sqrt_u == cplx{0.0, 0.0}) sqrt_u = std::sqrt(u);
  cplx lhs = phi_fused(M, b, d, sqrt_u, x, ctx);
  cplx sq = sqrt_u * qpow(ctx.q, 0.5 * static_cast<double>(N));
  KahanSum rhs;
  double tmax = 0.0;
  for (long long t = -M; t <= M; t += 2) {
    FusedWeightSpec s;
    s.M = M;
    s.N = N;
    s.a = a;
    s.b = b;
    s.c = a + static_cast<double>(t);
    s.d = d;
    s.u = u;
    if (!fused_admissible(s)) continue;
    cplx term = fused_weight(s, ctx) * phi_fused(M, a, s.c, sq, x, ctx);
    tmax = std::max(tmax, std::abs(term));
    rhs.add(term);
  }
  return make_check(lhs, rhs.value(), tmax, ctx);
}

// Closed form of the fused block: a height-squared q-power times a connection
// coefficient between the two shifted ladder bases.
inline CheckResult fused_vs_connection(const FusedWeightSpec& spec,
                                       const EllipticContext& ctx,
                                       cplx sqrt_u = {0.0, 0.0}) {
  if (!fused_admissible(spec)) throw std::invalid_argument("inadmissible heights");
  if (sqrt_u == cplx{0.0, 0.0}) sqrt_u = std::sqrt(spec.u);
  const cplx q = ctx.q;
  int bd, ca;
  integer_diff(spec.d, spec.b, bd);
  integer_diff(spec.c, spec.a, ca);
  long long k = (spec.M + bd) / 2, l = (spec.M + ca) / 2;
  double dm = static_cast<double>(spec.M), dn = static_cast<double>(spec.N);
  cplx aa = qpow(q, 0.5 * (1.0 - dm + spec.b)) * sqrt_u;
  cplx bb = qpow(q, 0.5 * (1.0 - dm - spec.b)) * sqrt_u;
  cplx cc = qpow(q, 0.5 * (1.0 - dm + dn + spec.a)) * sqrt_u;
  cplx dd = qpow(q, 0.5 * (1.0 - dm + dn - spec.a)) * sqrt_u;
  cplx pref = qpow(q, 0.25 * (spec.b * spec.b + spec.c * spec.c - spec.a * spec.a -
                              spec.d * spec.d) +
                          0.5 * dm * dn);
  // On the extreme top edge (b = a + N or b = a - N) two of the ladder bases
  // collide and the single-series form of the connection coefficient turns
  // into 0 times a divergent sum; the definitional double sum stays finite
  // there, so fall back on it.
  cplx coef;
  try {
    coef = rkl_coefficient(k, l, aa, bb, cc, dd, spec.M, ctx);
  } catch (const std::runtime_error&) {
    coef = rkl_from_binomials(k, l, aa, bb, cc, dd, spec.M, ctx);
  }
  return make_check(fused_weight(spec, ctx), pref * coef, 0.0, ctx);
}

// Triple-crossing relation for fused blocks: heights ordered around the
// hexagon as (a,b,c,d,e,f), multiplicities M across u, N across v, P across w.
inline CheckResult fused_yang_baxter(long long M, long long N, long long P,
                                     const std::array<cplx, 6>& heights,
                                     const cplx& u, const cplx& v, const cplx& w,
                                     const EllipticContext& ctx) {
  const cplx &a = heights[0], &b = heights[1], &c = heights[2];
  const cplx &d = heights[3], &e = heights[4], &f = heights[5];
  auto term = [&](long long rows, long long cols, const cplx& tl, const cplx& tr,
                  const cplx& bl, const cplx& br, const cplx& arg) -> cplx {
    FusedWeightSpec s;
    s.M = rows;
    s.N = cols;
    s.a = tl;
    s.b = tr;
    s.c = bl;
    s.d = br;
    s.u = arg;
    return fused_admissible(s) ? fused_weight(s, ctx) : cplx{0.0, 0.0};
  };
  KahanSum lhs, rhs;
  double tmax = 0.0;
  for (long long t = -M; t <= M; t += 2) {
    cplx x = a + static_cast<double>(t);
    cplx prod = term(M, N, a, b, x, c, u / v) * term(M, P, f, a, e, x, u / w) *
                term(N, P, e, x, d, c, v / w);
    tmax = std::max(tmax, std::abs(prod));
    lhs.add(prod);
  }
  for (long long t = -N; t <= N; t += 2) {
    cplx x = f + static_cast<double>(t);
    cplx prod = term(N, P, f, a, x, b, v / w) * term(M, P, x, b, d, c, u / w) *
                term(M, N, f, x, e, d, u / v);
    tmax = std::max(tmax, std::abs(prod));
    rhs.add(prod);
  }
  return make_check(lhs.value(), rhs.value(), tmax, ctx);
}

}  // namespace ellhyp
