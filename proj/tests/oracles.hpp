#pragma once

// Independent reference implementations used only by tests.  These are kept
// deliberately naive (plain loops, no tail corrections, no shared code with
// the library) so that agreement is meaningful.

#include <complex>
#include <cstdint>
#include <stdexcept>

namespace oracle {

using cplx = std::complex<double>;

// Plain truncated product for (a; p)_inf.
inline cplx brute_qpochhammer(const cplx& a, const cplx& p, int terms = 400) {
  cplx r{1.0, 0.0};
  cplx apk = a;
  for (int k = 0; k < terms; ++k) {
    r *= (1.0 - apk);
    apk *= p;
  }
  return r;
}

// Classical (single-base) q-shifted factorial (a; q)_k.
inline cplx classical_qfac(const cplx& a, const cplx& q, int k) {
  cplx r{1.0, 0.0};
  cplx aq = a;
  for (int j = 0; j < k; ++j) {
    r *= (1.0 - aq);
    aq *= q;
  }
  return r;
}

// Terminating classical 3phi2 with argument z, all bases q:
//   sum_k (a1,a2,a3;q)_k / ((q,b1,b2;q)_k) z^k,  k = 0..n
inline cplx classical_3phi2(const cplx& a1, const cplx& a2, const cplx& a3,
                            const cplx& b1, const cplx& b2, const cplx& q,
                            const cplx& z, int n) {
  cplx sum{0.0, 0.0};
  cplx term{1.0, 0.0};
  for (int k = 0; k <= n; ++k) {
    sum += term;
    cplx qk = std::pow(q, k);
    cplx num = (1.0 - a1 * qk) * (1.0 - a2 * qk) * (1.0 - a3 * qk);
    cplx den = (1.0 - q * qk) * (1.0 - b1 * qk) * (1.0 - b2 * qk);
    term *= num / den * z;
  }
  return sum;
}

// Exact rational arithmetic on 64-bit fractions, enough for the tiny
// classical Minton case checked in the series tests.
struct Frac {
  long long num = 0, den = 1;

  static long long gcd(long long a, long long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
      long long t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static Frac make(long long n, long long d) {
    if (d == 0) throw std::invalid_argument("Frac: zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    long long g = gcd(n, d);
    return Frac{n / g, d / g};
  }
  Frac operator+(const Frac& o) const { return make(num * o.den + o.num * den, den * o.den); }
  Frac operator-(const Frac& o) const { return make(num * o.den - o.num * den, den * o.den); }
  Frac operator*(const Frac& o) const { return make(num * o.num, den * o.den); }
  Frac operator/(const Frac& o) const { return make(num * o.den, den * o.num); }
  bool operator==(const Frac& o) const { return num == o.num && den == o.den; }
};

// Central difference derivative of a complex analytic function.
template <class F>
cplx central_diff(F&& f, const cplx& x, double h) {
  return (f(x + cplx{h, 0.0}) - f(x - cplx{h, 0.0})) / (2.0 * h);
}

}  // namespace oracle
