#pragma once

// Per-point finite-difference formulas shared by the OpenMP kernels
// (stencil.cpp) and the serial reference implementation (serial_ref.cpp).
// Keeping the arithmetic in one place makes the two variants bit-identical
// by construction; the loops and scheduling around it are what differ.
//
// All formulas are second order: centered differences wherever both
// neighbors exist (always, on periodic axes), and one-sided three/four-point
// formulas at box edges:
//   f'(x0)  = (-3 f0 + 4 f1 - f2) / (2h)
//   f''(x0) = ( 2 f0 - 5 f1 + 4 f2 - f3) / h^2
// Mixed partials compose the two 1-D first-derivative stencils; the
// composition stays second order because the formula used along one axis
// does not change while stepping along the other.

#include <complex>
#include <cstddef>

#include "jeq/grid.hpp"

namespace jeq::stencil_detail {

using cxd = std::complex<double>;

// Linear index of the point shifted by d along `axis`, given that the
// point's index on that axis is `idx`. Periodic axes wrap; box callers must
// keep idx + d in range.
inline std::size_t shifted(const Grid& G, std::size_t p, int idx, int axis, int d) {
  int s = G.extent(axis);
  int j = idx + d;
  if (G.periodic()) {
    j %= s;
    if (j < 0) j += s;
  }
  return std::size_t(std::ptrdiff_t(p) +
                     std::ptrdiff_t(j - idx) * std::ptrdiff_t(G.stride(axis)));
}

// First-derivative stencil along `axis` at axis index `idx`: fills up to
// three (offset, coefficient) pairs and returns the count. Coefficients
// include the 1/(2h) factor.
inline int d1_stencil(const Grid& G, int axis, int idx, int* off, double* coef) {
  const double inv2h = 0.5 / G.spacing(axis);
  if (!G.periodic() && idx == 0) {
    off[0] = 0; off[1] = 1; off[2] = 2;
    coef[0] = -3.0 * inv2h; coef[1] = 4.0 * inv2h; coef[2] = -1.0 * inv2h;
    return 3;
  }
  if (!G.periodic() && idx == G.extent(axis) - 1) {
    off[0] = 0; off[1] = -1; off[2] = -2;
    coef[0] = 3.0 * inv2h; coef[1] = -4.0 * inv2h; coef[2] = 1.0 * inv2h;
    return 3;
  }
  off[0] = -1; off[1] = 1;
  coef[0] = -inv2h; coef[1] = inv2h;
  return 2;
}

inline double d1_point(const Grid& G, const double* u, std::size_t p, int idx,
                       int axis) {
  int off[3];
  double coef[3];
  const int m = d1_stencil(G, axis, idx, off, coef);
  double acc = 0.0;
  for (int k = 0; k < m; ++k) acc += coef[k] * u[shifted(G, p, idx, axis, off[k])];
  return acc;
}

inline double d2_point(const Grid& G, const double* u, std::size_t p, int idx,
                       int axis) {
  const double invh2 = 1.0 / (G.spacing(axis) * G.spacing(axis));
  const int s = G.extent(axis);
  if (!G.periodic() && (idx == 0 || idx == s - 1)) {
    const int dir = idx == 0 ? 1 : -1;
    return (2.0 * u[p] - 5.0 * u[shifted(G, p, idx, axis, dir)] +
            4.0 * u[shifted(G, p, idx, axis, 2 * dir)] -
            u[shifted(G, p, idx, axis, 3 * dir)]) *
           invh2;
  }
  return (u[shifted(G, p, idx, axis, 1)] - 2.0 * u[p] +
          u[shifted(G, p, idx, axis, -1)]) *
         invh2;
}

// d^2 u / dx_a dx_b for a != b, as d1 along a applied to d1 along b.
inline double dmixed_point(const Grid& G, const double* u, std::size_t p,
                           const int* multi, int a, int b) {
  int off[3];
  double coef[3];
  const int m = d1_stencil(G, a, multi[a], off, coef);
  double acc = 0.0;
  for (int k = 0; k < m; ++k) {
    const std::size_t q = shifted(G, p, multi[a], a, off[k]);
    acc += coef[k] * d1_point(G, u, q, multi[b], b);
  }
  return acc;
}

// Complex Hessian block u_{i jbar} at one point, written Hermitian into
// out[n*n]: real part from (x_i x_j + y_i y_j) curvatures, imaginary part
// from (x_i y_j - y_i x_j), each divided by 4. Diagonal entries are exactly
// real (the two mixed terms cancel as operators, so they are never formed).
inline void hessian_point(const Grid& G, const double* u, std::size_t p,
                          const int* multi, cxd* out) {
  const int n = G.n();
  for (int i = 0; i < n; ++i) {
    const double rxx = d2_point(G, u, p, multi[i], i);
    const double ryy = d2_point(G, u, p, multi[n + i], n + i);
    out[std::size_t(i) * n + i] = cxd(0.25 * (rxx + ryy), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const double re = dmixed_point(G, u, p, multi, i, j) +
                        dmixed_point(G, u, p, multi, n + i, n + j);
      const double im = dmixed_point(G, u, p, multi, i, n + j) -
                        dmixed_point(G, u, p, multi, n + i, j);
      const cxd v = 0.25 * cxd(re, im);
      out[std::size_t(i) * n + j] = v;
      out[std::size_t(j) * n + i] = std::conj(v);
    }
  }
}

// Holomorphic gradient components u_i = (d/dx_i - i d/dy_i) u / 2.
inline void gradient_point(const Grid& G, const double* u, std::size_t p,
                           const int* multi, cxd* w) {
  const int n = G.n();
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 * cxd(d1_point(G, u, p, multi[i], i),
                     -d1_point(G, u, p, multi[n + i], n + i));
}

// Real trace of the product of two Hermitian blocks.
inline double herm_trace_product(int n, const cxd* F, const cxd* H) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += F[std::size_t(i) * n + i].real() * H[std::size_t(i) * n + i].real();
    for (int j = i + 1; j < n; ++j) {
      const cxd f = F[std::size_t(i) * n + j];
      const cxd h = H[std::size_t(i) * n + j];
      acc += 2.0 * (f.real() * h.real() + f.imag() * h.imag());
    }
  }
  return acc;
}

}  // namespace jeq::stencil_detail
