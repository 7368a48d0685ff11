#pragma once

// Shared numerical plumbing: evaluation context, residual bookkeeping,
// deterministic sampling and a few power/probe helpers used throughout.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ellhyp {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Carries the two nomes plus the knobs every evaluation shares.  |p|, |q| < 1
// is required by all series/product truncations; p = 0 or q = 0 degenerate
// cases are allowed (they reproduce the trigonometric/classical shadows).
struct EllipticContext {
  cplx p{0.21, 0.06};
  cplx q{0.31, -0.04};
  double eps_trunc = 1e-15;
  double tol = 1e-9;
  std::uint64_t rng_seed = 1;

  void require_valid() const {
    if (!(std::abs(p) < 1.0) || !(std::abs(q) < 1.0))
      throw std::invalid_argument("nome out of range: need |p| < 1 and |q| < 1");
    if (!(eps_trunc > 0.0) || !(tol > 0.0))
      throw std::invalid_argument("eps_trunc and tol must be positive");
  }

  EllipticContext with_seed(std::uint64_t s) const {
    EllipticContext c = *this;
    c.rng_seed = s;
    return c;
  }
};

// Outcome of a single identity check.  `scale` is never below 1 so residuals
// of quantities that are themselves tiny do not get inflated into failures.
struct CheckResult {
  double residual = 0.0;
  double scale = 1.0;
  bool pass = true;
  std::vector<cplx> witness;  // inputs that produced the worst residual, if recorded

  double ratio() const { return residual / scale; }

  // Keep whichever of the two results is worse, measured by residual/scale.
  void merge(const CheckResult& other) {
    if (other.ratio() > ratio()) *this = other;
  }
};

inline std::pair<double, double> relative_residual(const cplx& lhs, const cplx& rhs,
                                                   double scale_hint = 0.0) {
  double scale = std::max({1.0, scale_hint, std::abs(lhs), std::abs(rhs)});
  return {std::abs(lhs - rhs), scale};
}

inline CheckResult make_check(const cplx& lhs, const cplx& rhs, double scale_hint,
                              const EllipticContext& ctx) {
  auto [res, scale] = relative_residual(lhs, rhs, scale_hint);
  CheckResult r;
  r.residual = res;
  r.scale = scale;
  r.pass = res <= ctx.tol * scale;
  return r;
}

// Compensated (Neumaier) accumulator, one per real component.  Used where
// alternating sums cancel, e.g. Gram matrices of biorthogonal families.
class KahanSum {
 public:
  void add(const cplx& x) {
    acc(re_, cre_, x.real());
    acc(im_, cim_, x.imag());
  }
  cplx value() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void acc(double& s, double& c, double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double re_ = 0, im_ = 0, cre_ = 0, cim_ = 0;
};

// z^n for integer n (binary power; negative n goes through the inverse).
inline cplx ipow(cplx z, long long n) {
  if (n < 0) {
    z = 1.0 / z;
    n = -n;
  }
  cplx r{1.0, 0.0};
  while (n) {
    if (n & 1) r *= z;
    z *= z;
    n >>= 1;
  }
  return r;
}

// base^t with the principal branch of the logarithm.  All fractional powers
// in this library (square roots of nomes, q^{height} with complex heights)
// go through here so that every formula sees one consistent branch choice.
inline cplx qpow(const cplx& base, const cplx& expo) {
  if (base == cplx{0.0, 0.0}) throw std::invalid_argument("qpow of zero base");
  return std::exp(expo * std::log(base));
}

// n(n-1)/2, valid for negative n as well (matches the binomial in the theta
// quasi-periodicity exponent).
inline long long half_falling(long long n) { return n * (n - 1) / 2; }

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

// Stable derivation of per-check, per-trial seeds so adding a check never
// perturbs the draws of another.
inline std::uint64_t sub_seed(std::uint64_t root, const std::string& label,
                              std::uint64_t trial = 0) {
  return detail::splitmix64(root ^ detail::fnv1a(label) ^ (trial * 0x9e3779b97f4a7c15ULL));
}

// Deterministic draws.  mt19937_64 output is fully specified by the standard
// and the uniform mapping below avoids std::uniform_real_distribution, whose
// result sequence is implementation defined.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : gen_(seed) {}

  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  long long integer(long long lo, long long hi) {  // inclusive bounds
    return lo + static_cast<long long>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  cplx phase() { return std::polar(1.0, 2.0 * pi * unit()); }

  cplx annulus(double r_min, double r_max) {
    return std::polar(range(r_min, r_max), 2.0 * pi * unit());
  }

 private:
  std::mt19937_64 gen_;
};

// Seeded points in r_min <= |x| <= r_max keeping an angular margin of
// 10*eps_trunc from every excluded ray (rays are given by unit directions).
inline std::vector<cplx> sample_annulus(double r_min, double r_max, int count,
                                        const std::vector<cplx>& excluded_rays,
                                        const EllipticContext& ctx) {
  if (!(0.0 < r_min && r_min <= r_max))
    throw std::invalid_argument("sample_annulus: need 0 < r_min <= r_max");
  Sampler s(sub_seed(ctx.rng_seed, "sample_annulus"));
  const double margin = 10.0 * ctx.eps_trunc;
  std::vector<cplx> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      cplx x = s.annulus(r_min, r_max);
      bool ok = true;
      for (const cplx& ray : excluded_rays) {
        double d = std::arg(x / ray);
        if (std::abs(d) < margin) {
          ok = false;
          break;
        }
      }
      if (ok) {
        out.push_back(x);
        found = true;
      }
    }
    if (!found)
      throw std::runtime_error("sample_annulus: no admissible sample (exclusions cover the annulus?)");
  }
  return out;
}

// Does w sit on the discrete set {p^k : |k| <= k_max} within eps (relative)?
// Returns the exponent when it does.  Used to reject degenerate parameters
// before they turn into spurious zeros or poles.
inline std::optional<long long> near_power_of(const cplx& w, const cplx& p, double eps,
                                              long long k_max = 64) {
  if (w == cplx{0.0, 0.0} || p == cplx{0.0, 0.0}) return std::nullopt;
  double lp = std::log(std::abs(p));
  if (lp == 0.0) return std::nullopt;
  double kr = std::log(std::abs(w)) / lp;
  long long k = std::llround(kr);
  if (std::abs(kr - k) > 0.1 || std::abs(k) > k_max) return std::nullopt;
  if (std::abs(w * ipow(p, -k) - 1.0) <= eps) return k;
  return std::nullopt;
}

// Probe for q^k = p^l collisions (k, l not both zero), which make elliptic
// shifted factorials ill defined.  Search range |k|, |l| <= 32.
inline std::optional<std::pair<int, int>> pq_collision(const EllipticContext& ctx,
                                                       double eps = 1e-12) {
  if (ctx.p == cplx{0.0, 0.0} || ctx.q == cplx{0.0, 0.0}) return std::nullopt;
  const cplx lq = std::log(ctx.q), lp = std::log(ctx.p);
  for (int k = -32; k <= 32; ++k) {
    for (int l = -32; l <= 32; ++l) {
      if (k == 0 && l == 0) continue;
      cplx z = double(k) * lq - double(l) * lp;
      double m = std::round(z.imag() / (2.0 * pi));
      cplx d = z - cplx{0.0, 2.0 * pi * m};
      if (std::abs(d) <= eps * (std::abs(k) + std::abs(l) + 1)) return std::make_pair(k, l);
    }
  }
  return std::nullopt;
}

}  // namespace ellhyp
