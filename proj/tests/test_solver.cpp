#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "jeq/monitor.hpp"
#include "jeq/rng.hpp"
#include "jeq/solver.hpp"
#include "jeq/stencil.hpp"
#include "oracles.hpp"

using namespace jeq;

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
ScalarField fill(const Grid& g, F&& f) {
  ScalarField out(g);
  std::vector<int> multi(std::size_t(g.axes()));
  std::vector<double> x(std::size_t(g.axes()));
  for (std::size_t p = 0; p < g.size(); ++p) {
    g.unravel(p, multi.data());
    g.coordinates(multi.data(), x.data());
    out[p] = f(x.data());
  }
  return out;
}

// chi = scale * I + Hess(w) as a field
HermitianField perturbed_chi(const Grid& g, double scale, const ScalarField& w) {
  return gfrak_field(HermitianField(g, scale * HermitianMatrix::identity(g.n())), w)
      .field;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0;
  for (std::size_t p = 0; p < a.size(); ++p)
    m = std::max(m, std::abs(a[p] - b[p]));
  return m;
}

}  // namespace

TEST_CASE("trivial closed problem is already solved") {
  Grid g = Grid::uniform(2, Topology::periodic, 8);
  const HermitianField eye(g, HermitianMatrix::identity(2));
  const HermitianField chi(g, 2.0 * HermitianMatrix::identity(2));
  SolveResult res = solve_closed(chi, eye, SolveConfig{});
  CHECK(res.state.step_history.empty());  // converged before any Newton step
  CHECK(res.state.c == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sup_norm(res.state.u) < 1e-12);
  CHECK(res.state.residual_norm < 1e-12);
  CHECK(res.diag.osc < 1e-12);
}

TEST_CASE("perturbed closed problem recovers the closed-form solution") {
  // chi = 2 I + Hess(w): gfrak_u = 2 I exactly at u = -w + mean(w), so the
  // solved pair is (u, c) = (-mean_zero(w), 1) up to the Newton tolerance.
  Grid g = Grid::uniform(2, Topology::periodic, 16);
  const HermitianField eye(g, HermitianMatrix::identity(2));
  ScalarField w = fill(g, [](const double* x) {
    return 0.05 * std::sin(2 * kPi * x[0]) + 0.03 * std::cos(2 * kPi * x[3]);
  });
  const HermitianField chi = perturbed_chi(g, 2.0, w);
  ScalarField expect = mean_zero(w);
  expect *= -1.0;

  SolveConfig cfg;
  SolveResult res = solve_closed(chi, eye, cfg);
  CHECK(res.state.residual_norm <= cfg.newton_tol);
  CHECK(res.state.c == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sup_diff(res.state.u, expect) < 1e-9);
  CHECK(std::abs(mean_value(res.state.u)) < 1e-13);

  // every accepted step decreased the residual and kept gfrak positive
  double prev = 1e300;
  for (const StepRecord& s : res.state.step_history) {
    CHECK(s.residual_norm < prev);
    CHECK(s.positivity_margin >= cfg.positivity_floor);
    CHECK(s.step_length > 0);
    prev = s.residual_norm;
  }

  // a different admissible start converges to the same solution
  rng r(4);
  ScalarField init = oracle::random_field(g, r, 1e-3);
  SolveResult res2 = solve_closed(chi, eye, cfg, &init);
  CHECK(sup_diff(res2.state.u, res.state.u) < 1e-7);
  CHECK(res2.state.c == doctest::Approx(res.state.c).epsilon(1e-9));
}

TEST_CASE("linearized step solves the newton system it claims to") {
  Grid g = Grid::uniform(2, Topology::periodic, 9);
  const HermitianField eye(g, HermitianMatrix::identity(2));
  ScalarField w = fill(g, [](const double* x) {
    return 0.04 * std::sin(2 * kPi * x[0]) * std::cos(2 * kPi * x[1]);
  });
  const HermitianField chi = perturbed_chi(g, 2.0, w);

  SolveState state;
  state.u = ScalarField(g);
  GfrakField gf = gfrak_field(chi, state.u);
  REQUIRE(gf.min_margin > 0);
  ScalarField tr = trace_field(gf.field, eye);
  state.c = mean_value(tr);
  ScalarField psi_unused(g, 1.0);

  SolveConfig cfg;
  LinearizedStep step = linearize_and_solve(state, eye, chi, psi_unused, cfg);
  CHECK(std::abs(mean_value(step.v)) < 1e-12);
  CHECK(step.iterations > 0);
  CHECK(step.rel_residual <= cfg.krylov_tol);

  // residual of the linear system tr(F Hess v) + delta_c = r in sup norm
  HermitianField F = linearized_coefficient_field(gf.field, eye);
  ScalarField lhs = hessian_trace_apply(F, step.v);
  double worst = 0, rhs_scale = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const double r0 = tr[p] - state.c;
    worst = std::max(worst, std::abs(lhs[p] + step.delta_c - r0));
    rhs_scale = std::max(rhs_scale, std::abs(r0));
  }
  CHECK(worst < 1e-6 * std::max(1.0, rhs_scale));

  // an inadmissible state is rejected up front
  SolveState badstate = state;
  badstate.u = fill(g, [](const double* x) { return 40.0 * std::sin(2 * kPi * x[0]); });
  CHECK(oracle::error_name([&] {
          linearize_and_solve(badstate, eye, chi, psi_unused, cfg);
        }) == "PositivityLost");
}

TEST_CASE("dirichlet solve with a discretely manufactured right-hand side") {
  // psi = n / tr(gfrak_{u*}^{-1} g) makes u* an exact discrete solution, so
  // the solver accepts the start immediately and returns u* unchanged.
  Grid g(2, Topology::box, {9, 9, 9, 9});
  const HermitianField eye(g, HermitianMatrix::identity(2));
  const HermitianField chi(g, 2.0 * HermitianMatrix::identity(2));
  ScalarField ustar = fill(g, [](const double* x) {
    return 0.2 * std::sin(kPi * x[0]) * std::sin(kPi * x[2]);
  });
  GfrakField gf = gfrak_field(chi, ustar);
  REQUIRE(gf.min_margin > 0);
  ScalarField tr = trace_field(gf.field, eye);
  ScalarField psi(g);
  for (std::size_t p = 0; p < g.size(); ++p) psi[p] = 2.0 / tr[p];

  SolveConfig cfg;
  SolveResult res = solve_dirichlet(chi, eye, psi, ustar, ustar, cfg);
  CHECK(res.state.step_history.empty());
  CHECK(sup_diff(res.state.u, ustar) == 0.0);  // untouched start
  CHECK(res.state.residual_norm < 1e-12);

  // scaling psi up breaks the saturated subsolution inequality; the error
  // carries the first offending grid index
  ScalarField psihi = psi;
  psihi *= 1.1;
  CHECK(oracle::error_name([&] {
          solve_dirichlet(chi, eye, psihi, ustar, ustar, cfg);
        }) == "SubsolutionViolation");
  CHECK(oracle::error_message([&] {
          solve_dirichlet(chi, eye, psihi, ustar, ustar, cfg);
        }).find("(") != std::string::npos);

  // boundary data must match the subsolution on the boundary
  ScalarField phi_off = ustar;
  phi_off[0] += 0.5;  // (0,0,0,0) is a boundary corner
  CHECK(oracle::error_name([&] {
          solve_dirichlet(chi, eye, psi, phi_off, ustar, cfg);
        }) == "SubsolutionViolation");
  CHECK(oracle::error_message([&] {
          solve_dirichlet(chi, eye, psi, phi_off, ustar, cfg);
        }).find("boundary") != std::string::npos);
}

TEST_CASE("dirichlet solve converges on a genuinely nonlinear problem") {
  Grid g(2, Topology::box, {9, 9, 9, 9});
  const HermitianField eye(g, HermitianMatrix::identity(2));
  const HermitianField chi(g, 2.0 * HermitianMatrix::identity(2));
  ScalarField psi = fill(g, [](const double* x) {
    return 1.0 + 0.2 * std::sin(kPi * x[0]) * std::sin(kPi * x[2]);
  });
  ScalarField zero(g);

  SolveConfig cfg;
  SolveResult res = solve_dirichlet(chi, eye, psi, zero, zero, cfg);
  CHECK(res.state.residual_norm <= cfg.newton_tol);
  CHECK(!res.state.step_history.empty());
  CHECK(res.state.positivity_margin > 0.1);
  double prev = 1e300;
  for (const StepRecord& s : res.state.step_history) {
    CHECK(s.residual_norm < prev);
    prev = s.residual_norm;
  }

  // boundary values pinned exactly
  for (std::size_t p = 0; p < g.size(); ++p)
    if (g.is_boundary(p)) CHECK(res.state.u[p] == 0.0);

  // the holomorphic-derivative diagnostic stays finite and small-ish on the
  // solved state
  ScalarField dd = derivative_diagnostic(res.state, eye, chi, psi);
  CHECK(std::isfinite(sup_norm(dd)));

  // an unreachable psi exhausts the continuity method rather than looping
  ScalarField psi50 = psi;
  psi50 *= 50.0;
  SolveConfig loose = cfg;
  loose.require_subsolution = false;
  loose.max_newton_iters = 12;
  loose.continuity_steps = 3;
  std::string name = oracle::error_name(
      [&] { solve_dirichlet(chi, eye, psi50, zero, zero, loose); });
  CHECK((name == "ContinuityExhausted" || name == "StepFailure"));
}

TEST_CASE("estimate monitor on a solved closed state") {
  Grid g = Grid::uniform(2, Topology::periodic, 16);
  const HermitianField eye(g, HermitianMatrix::identity(2));
  ScalarField w = fill(g, [](const double* x) {
    return 0.05 * std::sin(2 * kPi * x[0]);
  });
  const HermitianField chi = perturbed_chi(g, 2.0, w);
  SolveResult res = solve_closed(chi, eye, SolveConfig{});
  REQUIRE(res.state.residual_norm < 1e-9);

  // psi = n/c as a constant field; usub = 0 is a subsolution here
  ScalarField psi(g, 2.0 / res.state.c);
  ScalarField usub(g);
  EstimateReport rep = estimate_monitor(res.state.u, usub, chi, eye, psi, 1.5, 0.5);
  CHECK(rep.C0 == doctest::Approx(res.diag.osc).epsilon(1e-12));
  CHECK(rep.residual_norm == doctest::Approx(res.state.residual_norm));
  // eps I <= 2 I + Hess w <= (1/eps) I: the eigenvalues are 2 - 0.05 pi^2
  // sin and the reciprocal side 1/(2 + 0.05 pi^2), so eps ~ 0.402
  CHECK(rep.epsilon == doctest::Approx(1.0 / (2.0 + 0.05 * kPi * kPi)).epsilon(1e-3));
  CHECK(rep.psi_min == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.psi_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.theta == doctest::Approx(rep.epsilon * rep.psi_min / 2).epsilon(1e-12));
  CHECK(rep.bigN >= 2.0);
  CHECK(rep.A_grad == 1.5);
  CHECK(rep.A_hess == 0.5);
  CHECK(rep.testfn_grad_max > 0.0);
  CHECK(rep.testfn_hess_max > 0.0);
  CHECK(rep.testfn_grad_max_location.size() == 4);
  CHECK(rep.testfn_hess_max_location.size() == 4);
  // vacuous-lemma bookkeeping is consistent
  CHECK((rep.lemma_points == 0) == (rep.lemma_margin_min == DBL_MAX));

  // an unsolved state is rejected
  ScalarField not_solution(g);
  CHECK(oracle::error_name([&] {
          estimate_monitor(not_solution, usub, chi, eye, psi);
        }) == "NotSolved");
}

TEST_CASE("solver configuration is validated") {
  SolveConfig bad;
  bad.newton_tol = 1e-14;
  CHECK(oracle::error_name([&] { bad.validate(); }) == "ConfigError");
  bad = SolveConfig{};
  bad.armijo_factor = 1.0;
  CHECK(oracle::error_name([&] { bad.validate(); }) == "ConfigError");
  bad = SolveConfig{};
  bad.max_newton_iters = 0;
  CHECK(oracle::error_name([&] { bad.validate(); }) == "ConfigError");
  bad = SolveConfig{};
  bad.positivity_floor = -1.0;
  CHECK(oracle::error_name([&] { bad.validate(); }) == "ConfigError");
}
