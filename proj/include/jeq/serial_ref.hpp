#pragma once

// Serial reference implementations of the hot grid kernels: plain
// single-threaded loops over the same per-point formulas used by the OpenMP
// kernels in stencil.hpp, with the same fixed reduction association. The
// parallel kernels must match these bit for bit at any thread count; tests
// assert that, and the benchmark target compares their throughput.

#include "jeq/grid.hpp"
#include "jeq/stencil.hpp"

namespace jeq::serial {

HermitianField complex_hessian(const ScalarField& u);
GfrakField gfrak_field(const HermitianField& chi, const ScalarField& u);
ScalarField residual_field(const HermitianField& gfrak, const HermitianField& g,
                           const ScalarField& psi);
ScalarField hessian_trace_apply(const HermitianField& F, const ScalarField& v);
double mean_value(const ScalarField& u);
double sup_norm(const ScalarField& f);

}  // namespace jeq::serial
