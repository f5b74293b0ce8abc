#include "jeq/monitor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>

#include "jeq/parallel.hpp"
#include "jeq/smallherm.hpp"
#include "jeq/solver.hpp"
#include "jeq/stencil.hpp"
#include "stencil_impl.hpp"

namespace jeq {
namespace {

std::string fnum(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<int> multi_of(const Grid& G, std::size_t p) {
  std::vector<int> m(std::size_t(G.axes()), 0);
  G.unravel(p, m.data());
  return m;
}

}  // namespace

EstimateReport estimate_monitor(const ScalarField& u, const ScalarField& usub,
                                const HermitianField& chi, const HermitianField& g,
                                const ScalarField& psi, double A_grad, double A_hess,
                                double solved_tol) {
  const Grid& G = u.grid();
  require_same_layout(G, usub.grid(), "estimate_monitor");
  require_same_layout(G, chi.grid(), "estimate_monitor");
  require_same_layout(G, g.grid(), "estimate_monitor");
  require_same_layout(G, psi.grid(), "estimate_monitor");
  if (!(solved_tol > 0.0))
    fail(errc::config_error, "estimate_monitor: solved_tol must be positive");
  const int n = G.n();
  const std::size_t N = G.size();

  EstimateReport rep;
  rep.A_grad = A_grad;
  rep.A_hess = A_hess;

  // Solved check.
  const GfrakField gfu = gfrak_field(chi, u);
  rep.residual_norm = sup_norm_interior(residual_field(gfu.field, g, psi));
  if (rep.residual_norm > solved_tol)
    fail(errc::not_solved, "estimate_monitor requires a solved state: residual "
                           "sup-norm " +
                               fnum(rep.residual_norm) + " exceeds solved_tol " +
                               fnum(solved_tol));

  // Two-sided eigenvalue bound of chi + Hess usub relative to g.
  const GfrakField gfs = gfrak_field(chi, usub);
  std::vector<double> lmin(N, 0.0), lmax(N, 0.0);
  std::atomic<std::size_t> bad{~std::size_t{0}};
  parallel_for(N, [&](std::size_t p) {
    double w[smallherm::kMaxDim];
    if (!smallherm::relative_eigvals(n, gfs.field.at(p), g.at(p), w)) {
      std::size_t cur = bad.load(std::memory_order_relaxed);
      while (p < cur && !bad.compare_exchange_weak(cur, p, std::memory_order_relaxed)) {
      }
      return;
    }
    lmin[p] = w[0];
    lmax[p] = w[n - 1];
  });
  if (bad.load() != ~std::size_t{0})
    fail(errc::non_positive_metric, "estimate_monitor: g is not positive definite "
                                    "at grid index " +
                                        G.index_string(bad.load()));
  double lmin_global = lmin[0], lmax_global = lmax[0];
  std::size_t lmin_arg = 0;
  for (std::size_t p = 1; p < N; ++p) {
    if (lmin[p] < lmin_global) {
      lmin_global = lmin[p];
      lmin_arg = p;
    }
    lmax_global = std::max(lmax_global, lmax[p]);
  }
  if (lmin_global <= 1e-14)
    fail(errc::non_admissible,
         "estimate_monitor: chi + Hess usub has relative eigenvalue " +
             fnum(lmin_global) + " at grid index " + G.index_string(lmin_arg));
  rep.epsilon = std::min(lmin_global, 1.0 / lmax_global);

  // psi range and the cone threshold for this problem class.
  rep.psi_min = deterministic_min(N, [&](std::size_t p) { return psi[p]; });
  rep.psi_max = deterministic_max(N, [&](std::size_t p) { return psi[p]; });
  const ConeThreshold thr = lemma_threshold(rep.epsilon, rep.psi_min, rep.psi_max, n);
  rep.theta = thr.theta;
  rep.bigN = thr.bigN;

  // Scalar state summaries.
  const Diagnostics d = diagnostics(u, chi, g);
  rep.C0 = d.osc;
  rep.grad_max = d.grad_max;
  rep.lap_max = d.lap_max;
  rep.boundary_grad_max = d.boundary_grad_max;
  rep.boundary_lap_max = d.boundary_lap_max;

  // Test function of the gradient bound: exp(A exp(eta)) |grad u|^2 with
  // eta = usub - u.
  const ScalarField grad2 = grad_squared_field(u, g);
  std::vector<double> t3(N, 0.0);
  parallel_for(N, [&](std::size_t p) {
    t3[p] = std::exp(A_grad * std::exp(usub[p] - u[p])) * grad2[p];
  });
  std::size_t arg3 = 0;
  for (std::size_t p = 1; p < N; ++p)
    if (t3[p] > t3[arg3]) arg3 = p;
  rep.testfn_grad_max = t3[arg3];
  rep.testfn_grad_max_location = multi_of(G, arg3);

  // Test function of the Hessian bound: exp(exp(A eta4)) W with
  // eta4 = usub - u + sup(u - usub) >= 0 and W = tr_g chi + Laplacian u.
  const double shift =
      deterministic_max(N, [&](std::size_t p) { return u[p] - usub[p]; });
  std::vector<double> t4(N, 0.0);
  parallel_for(N, [&](std::size_t p) {
    t4[p] = std::exp(std::exp(A_hess * (usub[p] - u[p] + shift))) * d.W_field[p];
  });
  std::size_t arg4 = 0;
  for (std::size_t p = 1; p < N; ++p)
    if (t4[p] > t4[arg4]) arg4 = p;
  rep.testfn_hess_max = t4[arg4];
  rep.testfn_hess_max_location = multi_of(G, arg4);

  // Threshold inequality tr(F (chi + Hess usub)) >= (n + theta)/psi at the
  // points where W >= bigN, with F taken at the solved state.
  const HermitianField F = linearized_coefficient_field(gfu.field, g);
  std::vector<double> margin(N, 0.0);
  parallel_for(N, [&](std::size_t p) {
    margin[p] = stencil_detail::herm_trace_product(n, F.at(p), gfs.field.at(p)) -
                (double(n) + rep.theta) / psi[p];
  });
  for (std::size_t p = 0; p < N; ++p) {
    if (d.W_field[p] < rep.bigN) continue;
    ++rep.lemma_points;
    rep.lemma_margin_min = std::min(rep.lemma_margin_min, margin[p]);
  }
  return rep;
}

}  // namespace jeq
