#pragma once

// Contour quadrature on circles.  Everything integrated in this library is
// analytic in a neighbourhood of the contour, so the equispaced trapezoid
// rule converges geometrically; we double the node count until two successive
// estimates agree.

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

#include "numerics.hpp"

namespace ellhyp {

struct QuadratureResult {
  cplx value{0.0, 0.0};
  double last_delta = 0.0;  // |change| at the final doubling, diagnostic
  int nodes = 0;
  operator cplx() const { return value; }
};

// (1/2 pi i) * contour integral of f(x) dx/x over |x| = r, evaluated as the
// plain average (1/N) sum f(r e^{2 pi i j/N}).  Node doubling reuses the
// previous sum (old nodes are the even nodes of the refined grid).
template <class F>
QuadratureResult trapezoid_contour(F&& f, double r, int initial_nodes,
                                   int max_doublings, const EllipticContext& ctx) {
  if (!(r > 0.0)) throw std::invalid_argument("trapezoid_contour: radius must be positive");
  int n = initial_nodes < 8 ? 8 : initial_nodes;

  auto ring_sum = [&](int count, int stride, int offset) {
    // sum of f at nodes offset, offset+stride, ... on the `count*stride` grid
    KahanSum s;
    for (int j = 0; j < count; ++j) {
      double ang = 2.0 * pi * (offset + j * stride) / double(count * stride);
      s.add(f(std::polar(r, ang)));
    }
    return s.value();
  };

  cplx total = ring_sum(n, 1, 0);
  cplx prev = total / double(n);
  double delta = 0.0;
  for (int d = 0; d < max_doublings; ++d) {
    cplx odd = ring_sum(n, 2, 1);
    total += odd;
    n *= 2;
    cplx cur = total / double(n);
    delta = std::abs(cur - prev);
    double scale = std::max({1.0, std::abs(cur), std::abs(prev)});
    if (delta <= ctx.tol * scale) return {cur, delta, n};
    prev = cur;
  }
  throw std::runtime_error("quadrature stall: " + std::to_string(n) +
                           " nodes, last two estimates differ by " + std::to_string(delta));
}

// Residue of f at `center` via a small circle of radius rho:
// (1/2 pi i) * contour integral of f(z) dz, same doubling strategy.
template <class F>
QuadratureResult residue_circle(F&& f, const cplx& center, double rho,
                                int initial_nodes, int max_doublings,
                                const EllipticContext& ctx) {
  if (!(rho > 0.0)) throw std::invalid_argument("residue_circle: radius must be positive");
  auto g = [&](const cplx& w) { return f(center + rho * w) * rho * w; };
  int n = initial_nodes < 8 ? 8 : initial_nodes;

  auto ring_sum = [&](int count, int stride, int offset) {
    KahanSum s;
    for (int j = 0; j < count; ++j) {
      double ang = 2.0 * pi * (offset + j * stride) / double(count * stride);
      s.add(g(std::polar(1.0, ang)));
    }
    return s.value();
  };

  cplx total = ring_sum(n, 1, 0);
  cplx prev = total / double(n);
  double delta = 0.0;
  for (int d = 0; d < max_doublings; ++d) {
    cplx odd = ring_sum(n, 2, 1);
    total += odd;
    n *= 2;
    cplx cur = total / double(n);
    delta = std::abs(cur - prev);
    double scale = std::max({1.0, std::abs(cur), std::abs(prev)});
    if (delta <= ctx.tol * scale) return {cur, delta, n};
    prev = cur;
  }
  throw std::runtime_error("quadrature stall in residue_circle after " + std::to_string(n) +
                           " nodes");
}

}  // namespace ellhyp
