#pragma once

// Test-side oracles and helpers, implemented independently of the library's
// numerics so agreement is evidence rather than tautology. The relative
// spectrum oracle uses inertia-counting bisection (Sylvester sign counts
// under symmetric Gaussian elimination); the library uses Cholesky reduction
// followed by cyclic Jacobi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "jeq/error.hpp"
#include "jeq/grid.hpp"
#include "jeq/pointwise.hpp"
#include "jeq/rng.hpp"

namespace oracle {

using jeq::cxd;

// Number of eigenvalues of the pencil (A, g) strictly below x: Hermitian
// M = A - x g has as many negative eigenvalues (g positive definite), and
// symmetric elimination pivots carry the inertia. Exact-zero pivots are
// nudged positive; that perturbs the count only on a measure-zero set of x.
inline int count_below(int n, const cxd* A, const cxd* g, double x) {
  cxd m[64];
  for (int i = 0; i < n * n; ++i) m[i] = A[i] - x * g[i];
  int neg = 0;
  for (int k = 0; k < n; ++k) {
    double piv = m[k * n + k].real();
    if (std::abs(piv) < 1e-300) piv = 1e-300;
    if (piv < 0) ++neg;
    for (int i = k + 1; i < n; ++i) {
      cxd f = m[i * n + k] / piv;
      for (int j = k; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  return neg;
}

// Relative eigenvalues of (A, g), descending, via bisection on count_below.
// Multiplicities fall out of the counting function automatically.
inline std::vector<double> relative_eigs(const jeq::HermitianMatrix& A,
                                         const jeq::HermitianMatrix& g) {
  const int n = A.dim();
  const cxd* a = A.data();
  const cxd* gm = g.data();
  double hi = 1.0, lo = -1.0;
  for (int it = 0; it < 200 && count_below(n, a, gm, hi) < n; ++it) hi *= 2;
  for (int it = 0; it < 200 && count_below(n, a, gm, lo) > 0; ++it) lo *= 2;
  std::vector<double> out(std::size_t(n), 0.0);
  for (int k = 1; k <= n; ++k) {
    double b0 = lo, b1 = hi;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (b0 + b1);
      if (mid <= b0 || mid >= b1) break;
      if (count_below(n, a, gm, mid) >= k)
        b1 = mid;
      else
        b0 = mid;
    }
    out[std::size_t(k - 1)] = 0.5 * (b0 + b1);
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

// Random Hermitian matrix with independent Gaussian entries.
inline jeq::HermitianMatrix random_hermitian(int n, jeq::rng& r, double amp = 1.0) {
  jeq::HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.set(i, i, cxd(amp * r.normal(), 0.0));
    for (int j = i + 1; j < n; ++j)
      m.set(i, j, amp * cxd(r.normal(), r.normal()));
  }
  return m;
}

// Random positive definite matrix B B^H + floor*I.
inline jeq::HermitianMatrix random_pd(int n, jeq::rng& r, double floor_eig = 0.1) {
  std::vector<cxd> b(std::size_t(n) * n);
  for (cxd& v : b) v = cxd(r.normal(), r.normal());
  jeq::HermitianMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      cxd s(0, 0);
      for (int k = 0; k < n; ++k)
        s += b[std::size_t(i) * n + k] * std::conj(b[std::size_t(j) * n + k]);
      if (i == j) s += floor_eig;
      m.set(i, j, s);
    }
  return m;
}

// Runs f and reports the jeq error class it raised ("no-error" otherwise),
// so checks read CHECK(error_name(...) == "SubsolutionViolation").
template <class F>
inline std::string error_name(F&& f) {
  try {
    f();
    return "no-error";
  } catch (const jeq::error& e) {
    return jeq::errc_name(e.code());
  }
}

// Like error_name but also captures the message.
template <class F>
inline std::string error_message(F&& f) {
  try {
    f();
    return "no-error";
  } catch (const jeq::error& e) {
    return e.what();
  }
}

// Random smooth-ish scalar field: iid uniform values in [-amp, amp]. Rough
// by design; kernel identity tests want unstructured data.
inline jeq::ScalarField random_field(const jeq::Grid& g, jeq::rng& r, double amp) {
  jeq::ScalarField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = r.uniform(-amp, amp);
  return f;
}

// Random Hermitian field with blocks floor*I + small random Hermitian.
inline jeq::HermitianField random_hermitian_field(const jeq::Grid& g, jeq::rng& r,
                                                  double diag, double amp) {
  jeq::HermitianField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    jeq::HermitianMatrix m = random_hermitian(g.n(), r, amp);
    m += diag * jeq::HermitianMatrix::identity(g.n());
    f.set_matrix(p, m);
  }
  return f;
}

}  // namespace oracle
