#pragma once

// Grid-wide finite-difference kernels for the equation tr(gfrak^{-1} g) =
// n/psi: the discrete complex Hessian, the nonlinear residual, the trace
// form applied by the Newton linearization, scalar diagnostics, and the
// mean-zero projection used on periodic grids.
//
// All kernels are data-parallel over grid points with no cross-point writes;
// reductions use the fixed chunked association from parallel.hpp, so results
// are bit-identical for any thread count. A plain serial variant of the hot
// kernels lives in jeq::serial (serial_ref.hpp) for testing and benchmarks.

#include "jeq/grid.hpp"

namespace jeq {

// u_{i jbar} = [(d_{x_i} d_{x_j} + d_{y_i} d_{y_j}) u
//               + i (d_{x_i} d_{y_j} - d_{y_i} d_{x_j}) u] / 4
// by second-order differences (centered, with one-sided formulas at box
// edges). Output blocks are Hermitian by construction with exactly real
// diagonals.
HermitianField complex_hessian(const ScalarField& u);

struct GfrakField {
  HermitianField field;  // chi + complex_hessian(u), pointwise
  double min_margin = 0.0;  // min over points of the smallest eigenvalue
  std::size_t argmin = 0;   // first linear index attaining it
};

// Pointwise chi + Hess(u) with the positivity margin of the result. The
// margin may be negative; callers decide whether that is an error.
GfrakField gfrak_field(const HermitianField& chi, const ScalarField& u);

// Pointwise tr(gfrak^{-1} g) - n/psi. Errors PositivityLost (naming the
// first offending grid index) when some gfrak block is not positive
// definite, ConfigError when psi is not strictly positive.
ScalarField residual_field(const HermitianField& gfrak, const HermitianField& g,
                           const ScalarField& psi);

// Pointwise Re tr(F(p) . Hess(v)(p)) with the same Hessian stencil as
// residual_field; this is the derivative of the residual in the direction v
// up to sign, so using it keeps the Newton Jacobian consistent.
ScalarField hessian_trace_apply(const HermitianField& F, const ScalarField& v);

// osc u, max |grad u|_g, max |Laplacian u|, W = tr_g chi + Laplacian u, and
// the boundary maxima on box grids (zero on periodic grids). The gradient
// norm is |grad u|^2 = g^{i jbar} u_i u_jbar with u_i = (d_{x_i} -
// i d_{y_i}) u / 2, and the Laplacian is g^{i jbar} u_{i jbar}.
Diagnostics diagnostics(const ScalarField& u, const HermitianField& chi,
                        const HermitianField& g);

// |grad u|^2_g as a field (the quantity whose maximum diagnostics reports).
ScalarField grad_squared_field(const ScalarField& u, const HermitianField& g);

// Laplacian(u) = g^{i jbar} u_{i jbar} as a field.
ScalarField laplacian_field(const ScalarField& u, const HermitianField& g);

// First derivative of a scalar field along one real axis (0..2n-1).
ScalarField d1_field(const ScalarField& f, int axis);

// Grid average with the deterministic summation order.
double mean_value(const ScalarField& u);

// u minus its grid average. Periodic grids only (BoxGridUnsupported
// otherwise); idempotent up to rounding.
ScalarField mean_zero(const ScalarField& u);

// max |f| over all points / over interior points only (identical on
// periodic grids, where every point is interior).
double sup_norm(const ScalarField& f);
double sup_norm_interior(const ScalarField& f);

}  // namespace jeq
