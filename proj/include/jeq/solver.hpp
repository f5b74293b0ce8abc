#pragma once

// Damped Newton solver for tr((chi + Hess u)^{-1} g) = n/psi on periodic and
// box grids, with a continuity-method fallback for the box (Dirichlet)
// problem.
//
// Periodic ("closed") problems treat the right-hand constant c as an extra
// unknown with the mean-zero constraint closing the system: the pair
// (mean-zero u, c) solves tr(gfrak_u^{-1} g) = c. Box problems fix u = phi on
// the boundary and solve the interior rows for a prescribed field psi,
// seeded by a subsolution usub.
//
// The linearization applies v -> tr(F . Hess v) with F = gfrak^{-1} g
// gfrak^{-1}, using the same complex-Hessian stencil as the residual, so the
// Jacobian is consistent with the nonlinear operator by construction. Linear
// systems are solved by Jacobi-preconditioned BiCGStab with deterministic
// dot products; all results are bit-identical for any thread count.

#include <vector>

#include "jeq/grid.hpp"
#include "jeq/stencil.hpp"

namespace jeq {

struct SolveConfig {
  int max_newton_iters = 60;
  double newton_tol = 1e-10;  // residual sup-norm target, >= 1e-13
  double armijo_factor = 0.5;
  double min_step = 0x1p-20;
  double krylov_tol = 1e-9;  // relative 2-norm
  int krylov_max_iters = 800;
  int continuity_steps = 8;
  double positivity_floor = 1e-8;  // smallest accepted eigenvalue of gfrak
  // Dirichlet precondition: verify the discrete subsolution inequality at
  // every interior point before solving. Regime-boundary probes switch it
  // off to reach the StepFailure / ContinuityExhausted reporting path.
  bool require_subsolution = true;
  // Relative slack for that check, absorbing rounding when usub saturates
  // the inequality (manufactured problems sit exactly on it).
  double subsolution_slack = 1e-10;

  void validate() const;  // ConfigError naming the offending field
};

struct StepRecord {
  int iter = 0;
  double residual_norm = 0.0;
  double step_length = 0.0;
  double positivity_margin = 0.0;
  int krylov_iters = 0;
};

struct SolveState {
  ScalarField u;
  double c = 0.0;  // closed case only: the constant playing n/psi
  double residual_norm = 0.0;
  double positivity_margin = 0.0;
  std::vector<StepRecord> step_history;
};

struct LinearizedStep {
  ScalarField v;        // Newton direction: mean-zero (periodic) or zero on
                        // the boundary (box)
  double delta_c = 0.0; // closed case
  int iterations = 0;   // Krylov iterations spent
  double rel_residual = 0.0;
};

struct SolveResult {
  SolveState state;
  Diagnostics diag;
};

// tr(gfrak^{-1} g) pointwise (PositivityLost naming the first bad index).
ScalarField trace_field(const HermitianField& gfrak, const HermitianField& g);

// F = gfrak^{-1} g gfrak^{-1} pointwise; the coefficient field of the
// linearized operator, and the weight in the subsolution margin
// tr(F (chi + Hess usub)).
HermitianField linearized_coefficient_field(const HermitianField& gfrak,
                                            const HermitianField& g);

// Solves the Newton system at the given admissible state:
//   tr(F . Hess v) + delta_c = residual   (periodic; mean(v) = 0, and the
//                                          state's c supplies n/psi, so the
//                                          psi argument is ignored)
//   tr(F . Hess v) = residual             (box interior rows, v = 0 on the
//                                          boundary)
// Errors LinearSolveFailure on stagnation, PositivityLost if the state is
// not admissible.
LinearizedStep linearize_and_solve(const SolveState& state, const HermitianField& g,
                                   const HermitianField& chi, const ScalarField& psi,
                                   const SolveConfig& cfg);

// One damped Newton update: backtracking over s in {1, af, af^2, ...,
// >= min_step}, accepting the first step whose gfrak stays above
// positivity_floor and whose residual sup-norm strictly decreases.
// Errors StepFailure when no such s exists. Periodic grids re-project u to
// mean zero and ignore psi (the state's c is used, and c is updated).
SolveState newton_step(const SolveState& state, const HermitianField& chi,
                       const HermitianField& g, const ScalarField& psi,
                       const SolveConfig& cfg);

// Closed-torus solve with unknown constant: from u = initial (default 0),
// c = grid mean of tr(gfrak^{-1} g). Returns the solved state (mean-zero u,
// residual_norm <= newton_tol) and its diagnostics.
SolveResult solve_closed(const HermitianField& chi, const HermitianField& g,
                         const SolveConfig& cfg, const ScalarField* initial = nullptr);

// Dirichlet solve on a box grid: u = phi on the boundary, Newton on the
// interior from the subsolution usub. Checks usub = phi on the boundary and
// (when cfg.require_subsolution) the discrete subsolution inequality at
// every interior point, raising SubsolutionViolation naming the first bad
// point. A StepFailure triggers one automatic continuity_path retry.
SolveResult solve_dirichlet(const HermitianField& chi, const HermitianField& g,
                            const ScalarField& psi, const ScalarField& phi,
                            const ScalarField& usub, const SolveConfig& cfg);

// Continuity method for the box problem: solves the family
// psi_t = (1-t) psi0 + t psi with psi0 = n / tr(gfrak_usub^{-1} g) (so t = 0
// is solved exactly by usub, and usub stays a subsolution for every t),
// marching t to 1 with warm starts. A failed leg halves the t-step; after 3
// halvings ContinuityExhausted.
SolveState continuity_path(const HermitianField& chi, const HermitianField& g,
                           const ScalarField& psi, const ScalarField& phi,
                           const ScalarField& usub, const SolveConfig& cfg);

// Pointwise max over k of |d_k residual| (holomorphic derivative modulus of
// tr(gfrak^{-1} g) - n/psi, by differencing the residual field). Small on
// solved states; on manufactured states it scales with the stencil's
// consistency error away from the box boundary.
ScalarField derivative_diagnostic(const SolveState& state, const HermitianField& g,
                                  const HermitianField& chi, const ScalarField& psi);

}  // namespace jeq
