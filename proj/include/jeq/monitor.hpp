#pragma once

// A-priori-estimate monitor: evaluates, on a solved state, the quantities
// that drive the gradient and Hessian bounds for the equation
// tr((chi + Hess u)^{-1} g) = n/psi.
//
//  * C0 = osc u, the gradient/Laplacian maxima, and their boundary-only
//    versions on box grids.
//  * The exponential-weight test functions whose interior maxima the
//    estimates control: exp(A_grad exp(eta)) |grad u|^2 with eta = usub - u,
//    and exp(exp(A_hess eta4)) W with eta4 = usub - u + sup(u - usub) and
//    W = tr_g chi + Laplacian u.
//  * The quantitative cone threshold (theta, N) for the two-sided
//    eigenvalue bound epsilon extracted from chi + Hess usub, and the
//    inequality tr(F (chi + Hess usub)) >= (n + theta)/psi at every point
//    where W >= N (F = gfrak^{-1} g gfrak^{-1} at the solved state).

#include <cfloat>
#include <vector>

#include "jeq/grid.hpp"
#include "jeq/pointwise.hpp"

namespace jeq {

struct EstimateReport {
  double C0 = 0.0;  // osc u
  double grad_max = 0.0;
  double lap_max = 0.0;
  double boundary_grad_max = 0.0;  // box grids; zero on periodic grids
  double boundary_lap_max = 0.0;
  double residual_norm = 0.0;  // sup-norm that passed the solved check

  double epsilon = 0.0;  // eps I <= chi_usub <= eps^{-1} I relative to g
  double psi_min = 0.0;
  double psi_max = 0.0;
  double theta = 0.0;
  double bigN = 0.0;

  double A_grad = 1.0;
  double A_hess = 1.0;
  double testfn_grad_max = 0.0;
  std::vector<int> testfn_grad_max_location;  // multi-index of the maximum
  double testfn_hess_max = 0.0;
  std::vector<int> testfn_hess_max_location;

  // Minimum of tr(F (chi + Hess usub)) - (n + theta)/psi over the points
  // with W >= bigN. lemma_points counts those points; when none qualify the
  // bound is vacuous and lemma_margin_min holds the sentinel DBL_MAX.
  double lemma_margin_min = DBL_MAX;
  long lemma_points = 0;
};

// Errors: NotSolved when the residual sup-norm exceeds solved_tol,
// PositivityLost / NonAdmissible when u or usub is not admissible,
// InfeasibleThreshold from the threshold construction, ConfigError on
// layout mismatches. On periodic grids pass psi = n/c as a constant field.
EstimateReport estimate_monitor(const ScalarField& u, const ScalarField& usub,
                                const HermitianField& chi, const HermitianField& g,
                                const ScalarField& psi, double A_grad = 1.0,
                                double A_hess = 1.0, double solved_tol = 1e-6);

}  // namespace jeq
