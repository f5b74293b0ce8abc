#include "jeq/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "jeq/parallel.hpp"
#include "jeq/smallherm.hpp"

namespace jeq {
namespace {

constexpr std::size_t kNoIndex = ~std::size_t{0};

void atomic_min_index(std::atomic<std::size_t>& a, std::size_t v) {
  std::size_t cur = a.load(std::memory_order_relaxed);
  while (v < cur && !a.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

std::string fnum(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void axpy(double a, const ScalarField& x, ScalarField& y) {
  const double* xs = x.data();
  double* ys = y.data();
  parallel_for(y.size(), [&](std::size_t i) { ys[i] += a * xs[i]; });
}

void subtract_mean(ScalarField& f) {
  const double m = mean_value(f);
  double* d = f.data();
  parallel_for(f.size(), [&](std::size_t i) { d[i] -= m; });
}

std::vector<unsigned char> boundary_mask(const Grid& G) {
  std::vector<unsigned char> m(G.size(), 0);
  if (!G.periodic())
    parallel_for(G.size(), [&](std::size_t p) { m[p] = G.is_boundary(p) ? 1 : 0; });
  return m;
}

void apply_mask(ScalarField& f, const std::vector<unsigned char>& mask) {
  double* d = f.data();
  parallel_for(f.size(), [&](std::size_t p) {
    if (mask[p]) d[p] = 0.0;
  });
}

double det_dot(const ScalarField& a, const ScalarField& b) {
  const double* x = a.data();
  const double* y = b.data();
  return deterministic_sum(a.size(), [&](std::size_t i) { return x[i] * y[i]; });
}

double norm2(const ScalarField& a) { return std::sqrt(det_dot(a, a)); }

ScalarField effective_psi(const Grid& G, const ScalarField* psi_box, double c) {
  if (psi_box) return *psi_box;
  if (!(c > 0.0))
    fail(errc::config_error,
         "closed-problem constant c must be positive (got " + fnum(c) + ")");
  return ScalarField(G, double(G.n()) / c);
}

struct Eval {
  GfrakField gf;
  ScalarField r;
  double rn = 0.0;
};

// psi_box == nullptr means the closed problem: the constant c plays n/psi.
Eval evaluate(const ScalarField& u, double c, const HermitianField& chi,
              const HermitianField& g, const ScalarField* psi_box) {
  Eval e;
  e.gf = gfrak_field(chi, u);
  e.r = residual_field(e.gf.field, g, effective_psi(u.grid(), psi_box, c));
  e.rn = sup_norm_interior(e.r);
  return e;
}

struct KrylovOutcome {
  int iters = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

template <class Op, class Pre>
KrylovOutcome bicgstab(const Grid& G, const ScalarField& b, ScalarField& x,
                       double tol, int maxit, Op&& apply, Pre&& precond) {
  x = ScalarField(G);
  KrylovOutcome out;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  ScalarField r = b;
  const ScalarField rhat = b;
  ScalarField p(G), v(G);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double rnorm = bnorm;
  constexpr double kBreakdown = 1e-300;
  for (int it = 0; it < maxit; ++it) {
    const double rho1 = det_dot(rhat, r);
    if (std::abs(rho1) < kBreakdown) break;
    const double beta = (rho1 / rho) * (alpha / omega);
    rho = rho1;
    {
      double* pd = p.data();
      const double* rd = r.data();
      const double* vd = v.data();
      const double om = omega, be = beta;
      parallel_for(p.size(),
                   [&](std::size_t i) { pd[i] = rd[i] + be * (pd[i] - om * vd[i]); });
    }
    ScalarField phat = precond(p);
    v = apply(phat);
    const double den = det_dot(rhat, v);
    if (std::abs(den) < kBreakdown) break;
    alpha = rho / den;
    ScalarField s = r;
    axpy(-alpha, v, s);
    const double snorm = norm2(s);
    out.iters = it + 1;
    if (snorm <= tol * bnorm) {
      axpy(alpha, phat, x);
      out.rel_residual = snorm / bnorm;
      out.converged = true;
      return out;
    }
    ScalarField shat = precond(s);
    ScalarField t = apply(shat);
    const double tt = det_dot(t, t);
    if (tt < kBreakdown) break;
    omega = det_dot(t, s) / tt;
    axpy(alpha, phat, x);
    axpy(omega, shat, x);
    r = s;
    axpy(-omega, t, r);
    rnorm = norm2(r);
    out.rel_residual = rnorm / bnorm;
    if (rnorm <= tol * bnorm) {
      out.converged = true;
      return out;
    }
    if (omega == 0.0) break;
  }
  out.rel_residual = rnorm / bnorm;
  return out;
}

// First interior point (index order) violating the subsolution inequality,
// with a small relative slack for saturated inequalities. The scan runs in
// parallel; the error is rebuilt serially at the winning index so messages
// are deterministic.
void check_subsolution(const GfrakField& gfs, const HermitianField& g,
                       const ScalarField& psi, const SolveConfig& cfg) {
  const Grid& G = g.grid();
  const int n = G.n();
  std::atomic<std::size_t> bad{kNoIndex};
  parallel_for(G.size(), [&](std::size_t p) {
    if (G.is_boundary(p)) return;
    double w[smallherm::kMaxDim];
    if (!smallherm::relative_eigvals(n, gfs.field.at(p), g.at(p), w)) {
      atomic_min_index(bad, p);
      return;
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (w[i] <= 1e-14) {
        atomic_min_index(bad, p);
        return;
      }
      sum += 1.0 / w[i];
    }
    const double target = double(n) / psi[p];
    if (target - sum < -cfg.subsolution_slack * target) atomic_min_index(bad, p);
  });
  const std::size_t p = bad.load();
  if (p == kNoIndex) return;
  // Rebuild through the scalar API so the failure kind and values are exact.
  RelativeSpectrum s = relative_spectrum(gfs.field.matrix(p), g.matrix(p));
  const double margin = subsolution_margin(s, psi[p]);  // may throw NonAdmissible
  fail(errc::subsolution_violation,
       "subsolution inequality fails at grid index " + G.index_string(p) +
           ": sum 1/lambda exceeds n/psi = " + fnum(double(n) / psi[p]) +
           " by " + fnum(-margin));
}

void check_boundary_values(const ScalarField& usub, const ScalarField& phi,
                           const char* what) {
  const Grid& G = usub.grid();
  double scale = 1.0;
  for (std::size_t p = 0; p < G.size(); ++p)
    if (G.is_boundary(p)) scale = std::max(scale, std::abs(phi[p]));
  for (std::size_t p = 0; p < G.size(); ++p) {
    if (!G.is_boundary(p)) continue;
    const double d = std::abs(usub[p] - phi[p]);
    if (d > 1e-12 * scale)
      fail(errc::subsolution_violation,
           std::string(what) + ": usub differs from phi at boundary index " +
               G.index_string(p) + " (|difference| = " + fnum(d) + ")");
  }
}

// Newton loop shared by the closed, Dirichlet, and continuity drivers.
// Counts its own steps against max_newton_iters (step_history may already
// hold records from earlier continuity legs).
void run_newton(SolveState& st, const HermitianField& chi, const HermitianField& g,
                const ScalarField* psi_box, const SolveConfig& cfg) {
  const Grid& G = st.u.grid();
  Eval cur = evaluate(st.u, st.c, chi, g, psi_box);
  if (cur.gf.min_margin < cfg.positivity_floor)
    fail(errc::positivity_lost,
         "initial state: gfrak margin " + fnum(cur.gf.min_margin) +
             " at grid index " + G.index_string(cur.gf.argmin) +
             " is below positivity_floor = " + fnum(cfg.positivity_floor));
  st.residual_norm = cur.rn;
  st.positivity_margin = cur.gf.min_margin;
  ScalarField psi_dummy;
  if (!psi_box) psi_dummy = ScalarField(G);
  int steps = 0;
  while (st.residual_norm > cfg.newton_tol) {
    if (steps >= cfg.max_newton_iters)
      fail(errc::step_failure,
           "Newton did not reach tolerance " + fnum(cfg.newton_tol) + " in " +
               std::to_string(cfg.max_newton_iters) +
               " iterations (residual " + fnum(st.residual_norm) + ")");
    st = newton_step(st, chi, g, psi_box ? *psi_box : psi_dummy, cfg);
    ++steps;
  }
}

void require_box(const Grid& G, const char* what) {
  if (G.periodic())
    fail(errc::config_error,
         std::string(what) + " requires a box grid (got " + G.describe() + ")");
}

}  // namespace

void SolveConfig::validate() const {
  if (max_newton_iters < 1)
    fail(errc::config_error, "max_newton_iters must be at least 1");
  if (!(newton_tol >= 1e-13))
    fail(errc::config_error, "newton_tol must be at least 1e-13");
  if (!(armijo_factor > 0.0 && armijo_factor < 1.0))
    fail(errc::config_error, "armijo_factor must lie strictly between 0 and 1");
  if (!(min_step > 0.0 && min_step <= 1.0))
    fail(errc::config_error, "min_step must lie in (0, 1]");
  if (!(krylov_tol > 0.0 && krylov_tol < 1.0))
    fail(errc::config_error, "krylov_tol must lie strictly between 0 and 1");
  if (krylov_max_iters < 1)
    fail(errc::config_error, "krylov_max_iters must be at least 1");
  if (continuity_steps < 1)
    fail(errc::config_error, "continuity_steps must be at least 1");
  if (!(positivity_floor > 0.0))
    fail(errc::config_error, "positivity_floor must be positive");
  if (!(subsolution_slack >= 0.0))
    fail(errc::config_error, "subsolution_slack must be non-negative");
}

ScalarField trace_field(const HermitianField& gfrak, const HermitianField& g) {
  require_same_layout(gfrak.grid(), g.grid(), "trace_field");
  const Grid& G = gfrak.grid();
  const int n = G.n();
  ScalarField out(G);
  std::atomic<std::size_t> bad{kNoIndex};
  parallel_for(G.size(), [&](std::size_t p) {
    cxd a[smallherm::kMaxDim * smallherm::kMaxDim];
    std::copy_n(gfrak.at(p), std::size_t(n) * n, a);
    if (!smallherm::cholesky(n, a)) {
      atomic_min_index(bad, p);
      return;
    }
    out[p] = smallherm::trace_inv_times(n, a, g.at(p));
  });
  if (bad.load() != kNoIndex)
    fail(errc::positivity_lost, "gfrak is not positive definite at grid index " +
                                    G.index_string(bad.load()));
  return out;
}

HermitianField linearized_coefficient_field(const HermitianField& gfrak,
                                            const HermitianField& g) {
  require_same_layout(gfrak.grid(), g.grid(), "linearized_coefficient_field");
  const Grid& G = gfrak.grid();
  const int n = G.n();
  HermitianField F(G);
  std::atomic<std::size_t> bad{kNoIndex};
  parallel_for(G.size(), [&](std::size_t p) {
    constexpr int cap = smallherm::kMaxDim * smallherm::kMaxDim;
    cxd a[cap], inv[cap], t1[cap], f[cap];
    std::copy_n(gfrak.at(p), std::size_t(n) * n, a);
    if (!smallherm::cholesky(n, a)) {
      atomic_min_index(bad, p);
      return;
    }
    smallherm::inverse_from_chol(n, a, inv);
    smallherm::matmul(n, inv, g.at(p), t1);
    smallherm::matmul(n, t1, inv, f);
    cxd* out = F.at(p);
    for (int i = 0; i < n; ++i) {
      out[i * n + i] = cxd(f[i * n + i].real(), 0.0);
      for (int j = i + 1; j < n; ++j) {
        const cxd m = 0.5 * (f[i * n + j] + std::conj(f[j * n + i]));
        out[i * n + j] = m;
        out[j * n + i] = std::conj(m);
      }
    }
  });
  if (bad.load() != kNoIndex)
    fail(errc::positivity_lost, "gfrak is not positive definite at grid index " +
                                    G.index_string(bad.load()));
  return F;
}

LinearizedStep linearize_and_solve(const SolveState& state, const HermitianField& g,
                                   const HermitianField& chi, const ScalarField& psi,
                                   const SolveConfig& cfg) {
  cfg.validate();
  const Grid& G = state.u.grid();
  require_same_layout(G, g.grid(), "linearize_and_solve");
  require_same_layout(G, chi.grid(), "linearize_and_solve");
  const bool closed = G.periodic();
  if (!closed) require_same_layout(G, psi.grid(), "linearize_and_solve");

  GfrakField gf = gfrak_field(chi, state.u);
  if (gf.min_margin <= 0.0)
    fail(errc::positivity_lost,
         "gfrak (chi + Hess u) is not positive definite at grid index " +
             G.index_string(gf.argmin) + " (margin " + fnum(gf.min_margin) + ")");
  const ScalarField r =
      residual_field(gf.field, g, effective_psi(G, closed ? nullptr : &psi, state.c));
  const HermitianField F = linearized_coefficient_field(gf.field, g);
  const std::vector<unsigned char> mask = boundary_mask(G);

  ScalarField b = r;
  if (closed)
    subtract_mean(b);
  else
    apply_mask(b, mask);

  // Jacobi preconditioner: the coefficient of v(p) in tr(F . Hess v)(p). All
  // system rows are interior, where the one-dimensional stencils are
  // centered, so the diagonal is sum_i F_ii * (-1/2)(1/h_{x_i}^2 +
  // 1/h_{y_i}^2); the mixed-derivative terms do not touch the center point.
  const int n = G.n();
  std::vector<double> half_ih2(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double hx = G.spacing(i), hy = G.spacing(n + i);
    half_ih2[std::size_t(i)] = -0.5 * (1.0 / (hx * hx) + 1.0 / (hy * hy));
  }
  ScalarField dinv(G);
  parallel_for(G.size(), [&](std::size_t p) {
    if (!mask.empty() && mask[p]) return;  // boundary entries stay zero
    const cxd* f = F.at(p);
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += f[i * n + i].real() * half_ih2[std::size_t(i)];
    dinv[p] = 1.0 / d;
  });

  auto apply = [&](const ScalarField& z) {
    ScalarField az = hessian_trace_apply(F, z);
    if (closed)
      subtract_mean(az);
    else
      apply_mask(az, mask);
    return az;
  };
  auto precond = [&](const ScalarField& z) {
    ScalarField w(G);
    const double* zd = z.data();
    double* wd = w.data();
    const double* dd = dinv.data();
    parallel_for(w.size(), [&](std::size_t i) { wd[i] = dd[i] * zd[i]; });
    if (closed) subtract_mean(w);
    return w;
  };

  ScalarField v;
  const KrylovOutcome out =
      bicgstab(G, b, v, cfg.krylov_tol, cfg.krylov_max_iters, apply, precond);
  if (!out.converged)
    fail(errc::linear_solve_failure,
         "linear solver stagnated after " + std::to_string(out.iters) +
             " iterations (relative residual " + fnum(out.rel_residual) + ")");

  LinearizedStep step;
  step.v = std::move(v);
  step.iterations = out.iters;
  step.rel_residual = out.rel_residual;
  if (closed) {
    const ScalarField av = hessian_trace_apply(F, step.v);
    step.delta_c = mean_value(r) - mean_value(av);
  }
  return step;
}

SolveState newton_step(const SolveState& state, const HermitianField& chi,
                       const HermitianField& g, const ScalarField& psi,
                       const SolveConfig& cfg) {
  cfg.validate();
  const Grid& G = state.u.grid();
  const bool closed = G.periodic();
  const ScalarField* psi_box = closed ? nullptr : &psi;
  const Eval cur = evaluate(state.u, state.c, chi, g, psi_box);
  const LinearizedStep lin = linearize_and_solve(state, g, chi, psi, cfg);
  for (double s = 1.0; s >= cfg.min_step; s *= cfg.armijo_factor) {
    ScalarField u_try = state.u;
    axpy(s, lin.v, u_try);
    if (closed) subtract_mean(u_try);
    const double c_try = state.c + s * lin.delta_c;
    if (closed && !(c_try > 0.0)) continue;
    const GfrakField gft = gfrak_field(chi, u_try);
    if (gft.min_margin < cfg.positivity_floor) continue;
    const ScalarField r_try =
        residual_field(gft.field, g, effective_psi(G, psi_box, c_try));
    const double rn_try = sup_norm_interior(r_try);
    if (rn_try < cur.rn) {
      SolveState next = state;
      next.u = std::move(u_try);
      next.c = c_try;
      next.residual_norm = rn_try;
      next.positivity_margin = gft.min_margin;
      next.step_history.push_back(StepRecord{int(state.step_history.size()) + 1,
                                             rn_try, s, gft.min_margin,
                                             lin.iterations});
      return next;
    }
  }
  fail(errc::step_failure,
       "line search failed at residual " + fnum(cur.rn) + ": no step in [" +
           fnum(cfg.min_step) +
           ", 1] keeps gfrak above the positivity floor and decreases the residual");
}

SolveResult solve_closed(const HermitianField& chi, const HermitianField& g,
                         const SolveConfig& cfg, const ScalarField* initial) {
  cfg.validate();
  const Grid& G = chi.grid();
  if (!G.periodic())
    fail(errc::config_error,
         "solve_closed requires a periodic grid (got " + G.describe() + ")");
  require_same_layout(G, g.grid(), "solve_closed");
  ScalarField u0 = initial ? *initial : ScalarField(G);
  require_same_layout(G, u0.grid(), "solve_closed");
  u0 = mean_zero(u0);
  const GfrakField gf0 = gfrak_field(chi, u0);
  if (gf0.min_margin < cfg.positivity_floor)
    fail(errc::positivity_lost,
         "initial state: gfrak margin " + fnum(gf0.min_margin) + " at grid index " +
             G.index_string(gf0.argmin) + " is below positivity_floor = " +
             fnum(cfg.positivity_floor));
  SolveState st;
  st.u = std::move(u0);
  st.c = mean_value(trace_field(gf0.field, g));
  run_newton(st, chi, g, nullptr, cfg);
  SolveResult res;
  res.state = std::move(st);
  res.diag = diagnostics(res.state.u, chi, g);
  return res;
}

SolveResult solve_dirichlet(const HermitianField& chi, const HermitianField& g,
                            const ScalarField& psi, const ScalarField& phi,
                            const ScalarField& usub, const SolveConfig& cfg) {
  cfg.validate();
  const Grid& G = chi.grid();
  require_box(G, "solve_dirichlet");
  require_same_layout(G, g.grid(), "solve_dirichlet");
  require_same_layout(G, psi.grid(), "solve_dirichlet");
  require_same_layout(G, phi.grid(), "solve_dirichlet");
  require_same_layout(G, usub.grid(), "solve_dirichlet");
  check_boundary_values(usub, phi, "solve_dirichlet");
  const GfrakField gfs = gfrak_field(chi, usub);
  if (gfs.min_margin < cfg.positivity_floor)
    fail(errc::subsolution_violation,
         "usub is not admissible: gfrak margin " + fnum(gfs.min_margin) +
             " at grid index " + G.index_string(gfs.argmin) +
             " is below positivity_floor = " + fnum(cfg.positivity_floor));
  if (cfg.require_subsolution) check_subsolution(gfs, g, psi, cfg);
  SolveState st;
  st.u = usub;
  try {
    run_newton(st, chi, g, &psi, cfg);
  } catch (const error& e) {
    if (e.code() != errc::step_failure) throw;
    st = continuity_path(chi, g, psi, phi, usub, cfg);
  }
  SolveResult res;
  res.state = std::move(st);
  res.diag = diagnostics(res.state.u, chi, g);
  return res;
}

SolveState continuity_path(const HermitianField& chi, const HermitianField& g,
                           const ScalarField& psi, const ScalarField& phi,
                           const ScalarField& usub, const SolveConfig& cfg) {
  cfg.validate();
  const Grid& G = chi.grid();
  require_box(G, "continuity_path");
  require_same_layout(G, g.grid(), "continuity_path");
  require_same_layout(G, psi.grid(), "continuity_path");
  require_same_layout(G, phi.grid(), "continuity_path");
  require_same_layout(G, usub.grid(), "continuity_path");
  check_boundary_values(usub, phi, "continuity_path");
  const GfrakField gfs = gfrak_field(chi, usub);
  if (gfs.min_margin < cfg.positivity_floor)
    fail(errc::subsolution_violation,
         "usub is not admissible: gfrak margin " + fnum(gfs.min_margin) +
             " at grid index " + G.index_string(gfs.argmin) +
             " is below positivity_floor = " + fnum(cfg.positivity_floor));

  // psi0 makes usub an exact solution of the t = 0 problem, and a
  // subsolution of every interpolated problem along the path to psi.
  const ScalarField tr = trace_field(gfs.field, g);
  ScalarField psi0(G);
  {
    const double n = double(G.n());
    parallel_for(G.size(), [&](std::size_t p) { psi0[p] = n / tr[p]; });
  }

  SolveState st;
  st.u = usub;
  run_newton(st, chi, g, &psi0, cfg);  // t = 0: zero iterations by construction

  double t = 0.0;
  double dt = 1.0 / cfg.continuity_steps;
  int bisections = 0;
  ScalarField psi_t(G);
  while (t < 1.0) {
    const double tn = std::min(1.0, t + dt);
    parallel_for(G.size(), [&](std::size_t p) {
      psi_t[p] = (1.0 - tn) * psi0[p] + tn * psi[p];
    });
    SolveState trial = st;
    bool ok = true;
    std::string why;
    try {
      run_newton(trial, chi, g, &psi_t, cfg);
    } catch (const error& e) {
      if (e.code() != errc::step_failure && e.code() != errc::linear_solve_failure)
        throw;
      ok = false;
      why = e.what();
    }
    if (ok) {
      st = std::move(trial);
      t = tn;
    } else {
      ++bisections;
      if (bisections > 3)
        fail(errc::continuity_exhausted,
             "continuity path exhausted after 3 time-step bisections at t = " +
                 fnum(tn) + ": " + why);
      dt *= 0.5;
    }
  }
  return st;
}

ScalarField derivative_diagnostic(const SolveState& state, const HermitianField& g,
                                  const HermitianField& chi, const ScalarField& psi) {
  const Grid& G = state.u.grid();
  require_same_layout(G, g.grid(), "derivative_diagnostic");
  require_same_layout(G, chi.grid(), "derivative_diagnostic");
  const bool closed = G.periodic();
  if (!closed) require_same_layout(G, psi.grid(), "derivative_diagnostic");
  const GfrakField gf = gfrak_field(chi, state.u);
  const ScalarField r =
      residual_field(gf.field, g, effective_psi(G, closed ? nullptr : &psi, state.c));
  ScalarField out(G);
  const int n = G.n();
  for (int k = 0; k < n; ++k) {
    const ScalarField dx = d1_field(r, k);
    const ScalarField dy = d1_field(r, n + k);
    parallel_for(G.size(), [&](std::size_t p) {
      out[p] = std::max(out[p], 0.5 * std::hypot(dx[p], dy[p]));
    });
  }
  return out;
}

}  // namespace jeq
