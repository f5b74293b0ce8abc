#pragma once

// Dense complex Hermitian kernels for the per-point fiber dimension
// (n <= kMaxDim). Row-major storage a[i*n + j], allocation-free so the grid
// loops can call them per point. Eigenvalues use cyclic Jacobi; the relative
// problem det(A - lambda g) = 0 is reduced by a Cholesky congruence of g and
// explicit re-symmetrization.

#include <complex>
#include <cstddef>

namespace jeq::smallherm {

using cxd = std::complex<double>;

constexpr int kMaxDim = 8;

// In-place lower Cholesky A = L L^H. Returns false when a pivot is
// non-positive or not finite (A not positive definite).
bool cholesky(int n, cxd* a);

// Solves L L^H x = b in place (b overwritten with x).
void chol_solve_vec(int n, const cxd* L, cxd* b);

// tr(A^{-1} G) for A = L L^H; exact-real by symmetry, returns the real part.
double trace_inv_times(int n, const cxd* L, const cxd* G);

// Inverse of lower-triangular L, written to Z (lower triangular).
void tri_inverse_lower(int n, const cxd* L, cxd* Z);

// out = A^{-1} from the Cholesky factor: Z^H Z with Z = L^{-1}.
void inverse_from_chol(int n, const cxd* L, cxd* out);

// out = A * B (general complex matmul).
void matmul(int n, const cxd* A, const cxd* B, cxd* out);

// Eigenvalues of Hermitian A, ascending. A is destroyed.
void eigvals_inplace(int n, cxd* a, double* w);

// Eigenvalues of Hermitian A (copy taken), ascending.
void eigvals(int n, const cxd* a, double* w);

// Relative eigenvalues: roots of det(A - lambda g) = 0, ascending. Returns
// false when g is not positive definite.
bool relative_eigvals(int n, const cxd* A, const cxd* g, double* w);

}  // namespace jeq::smallherm
