#include "jeq/smallherm.hpp"

#include <algorithm>
#include <cmath>

namespace jeq::smallherm {

bool cholesky(int n, cxd* a) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      cxd s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * std::conj(a[j * n + k]);
      if (i == j) {
        double d = s.real();
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        a[i * n + i] = std::sqrt(d);
      } else {
        a[i * n + j] = s / a[j * n + j].real();
      }
    }
    for (int j = i + 1; j < n; ++j) a[i * n + j] = cxd(0.0, 0.0);
  }
  return true;
}

void chol_solve_vec(int n, const cxd* L, cxd* b) {
  for (int i = 0; i < n; ++i) {
    cxd s = b[i];
    for (int k = 0; k < i; ++k) s -= L[i * n + k] * b[k];
    b[i] = s / L[i * n + i].real();
  }
  for (int i = n - 1; i >= 0; --i) {
    cxd s = b[i];
    for (int k = i + 1; k < n; ++k) s -= std::conj(L[k * n + i]) * b[k];
    b[i] = s / L[i * n + i].real();
  }
}

double trace_inv_times(int n, const cxd* L, const cxd* G) {
  cxd col[kMaxDim];
  double tr = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[i] = G[i * n + j];
    chol_solve_vec(n, L, col);
    tr += col[j].real();
  }
  return tr;
}

void tri_inverse_lower(int n, const cxd* L, cxd* Z) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Z[i * n + j] = cxd(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    Z[j * n + j] = cxd(1.0 / L[j * n + j].real(), 0.0);
    for (int i = j + 1; i < n; ++i) {
      cxd s(0.0, 0.0);
      for (int k = j; k < i; ++k) s += L[i * n + k] * Z[k * n + j];
      Z[i * n + j] = -s / L[i * n + i].real();
    }
  }
}

void inverse_from_chol(int n, const cxd* L, cxd* out) {
  cxd Z[kMaxDim * kMaxDim];
  tri_inverse_lower(n, L, Z);
  // out = Z^H Z
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cxd s(0.0, 0.0);
      for (int k = 0; k < n; ++k) s += std::conj(Z[k * n + i]) * Z[k * n + j];
      out[i * n + j] = s;
    }
}

void matmul(int n, const cxd* A, const cxd* B, cxd* out) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cxd s(0.0, 0.0);
      for (int k = 0; k < n; ++k) s += A[i * n + k] * B[k * n + j];
      out[i * n + j] = s;
    }
}

void eigvals_inplace(int n, cxd* a, double* w) {
  if (n == 1) {
    w[0] = a[0].real();
    return;
  }
  double scale = 0.0;
  for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(a[i]));
  if (scale == 0.0) {
    for (int i = 0; i < n; ++i) w[i] = 0.0;
    return;
  }
  const double tol = 1e-15 * scale;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a[p * n + q]));
    if (off <= tol) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cxd b = a[p * n + q];
        const double ab = std::abs(b);
        if (ab <= tol * 1e-2) continue;
        const cxd alpha = b / ab;  // phase of the pivot entry
        const double app = a[p * n + p].real();
        const double aqq = a[q * n + q].real();
        const double tau = (aqq - app) / (2.0 * ab);
        double t;
        if (tau == 0.0)
          t = 1.0;
        else
          t = -((tau > 0) ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(tau * tau + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // rows/columns k != p, q
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const cxd akp = a[k * n + p];
          const cxd akq = a[k * n + q];
          const cxd nkp = akp * c + akq * (s * std::conj(alpha));
          const cxd nkq = akp * (-s * alpha) + akq * c;
          a[k * n + p] = nkp;
          a[p * n + k] = std::conj(nkp);
          a[k * n + q] = nkq;
          a[q * n + k] = std::conj(nkq);
        }
        const double napp = c * c * app + s * s * aqq + 2.0 * c * s * ab;
        const double naqq = s * s * app + c * c * aqq - 2.0 * c * s * ab;
        a[p * n + p] = cxd(napp, 0.0);
        a[q * n + q] = cxd(naqq, 0.0);
        a[p * n + q] = cxd(0.0, 0.0);
        a[q * n + p] = cxd(0.0, 0.0);
      }
    }
  }
  for (int i = 0; i < n; ++i) w[i] = a[i * n + i].real();
  std::sort(w, w + n);
}

void eigvals(int n, const cxd* a, double* w) {
  cxd buf[kMaxDim * kMaxDim];
  for (int i = 0; i < n * n; ++i) buf[i] = a[i];
  eigvals_inplace(n, buf, w);
}

bool relative_eigvals(int n, const cxd* A, const cxd* g, double* w) {
  cxd L[kMaxDim * kMaxDim];
  for (int i = 0; i < n * n; ++i) L[i] = g[i];
  if (!cholesky(n, L)) return false;
  cxd Z[kMaxDim * kMaxDim], ZA[kMaxDim * kMaxDim], B[kMaxDim * kMaxDim];
  tri_inverse_lower(n, L, Z);
  matmul(n, Z, A, ZA);
  // B = Z A Z^H, re-symmetrized against rounding drift
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cxd s(0.0, 0.0);
      for (int k = 0; k < n; ++k) s += ZA[i * n + k] * std::conj(Z[j * n + k]);
      B[i * n + j] = s;
    }
  for (int i = 0; i < n; ++i) {
    B[i * n + i] = cxd(B[i * n + i].real(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const cxd m = 0.5 * (B[i * n + j] + std::conj(B[j * n + i]));
      B[i * n + j] = m;
      B[j * n + i] = std::conj(m);
    }
  }
  eigvals_inplace(n, B, w);
  return true;
}

}  // namespace jeq::smallherm
