#include "jeq/stencil.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

#include "jeq/parallel.hpp"
#include "jeq/smallherm.hpp"
#include "stencil_impl.hpp"

namespace jeq {

namespace {

using stencil_detail::cxd;

void atomic_min_index(std::atomic<std::size_t>& a, std::size_t v) {
  std::size_t cur = a.load(std::memory_order_relaxed);
  while (v < cur && !a.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
  }
}

constexpr std::size_t kNoIndex = ~std::size_t(0);

}  // namespace

HermitianField complex_hessian(const ScalarField& u) {
  const Grid& G = u.grid();
  HermitianField out(G);
  parallel_for(G.size(), [&](std::size_t p) {
    int multi[16];
    G.unravel(p, multi);
    stencil_detail::hessian_point(G, u.data(), p, multi, out.at(p));
  });
  return out;
}

GfrakField gfrak_field(const HermitianField& chi, const ScalarField& u) {
  const Grid& G = u.grid();
  require_same_layout(G, chi.grid(), "gfrak_field");
  const int n = G.n();
  GfrakField r{HermitianField(G), 0.0, 0};
  std::vector<double> margin(G.size());
  parallel_for(G.size(), [&](std::size_t p) {
    int multi[16];
    G.unravel(p, multi);
    cxd* dst = r.field.at(p);
    stencil_detail::hessian_point(G, u.data(), p, multi, dst);
    const cxd* c = chi.at(p);
    for (int k = 0; k < n * n; ++k) dst[k] += c[k];
    double w[smallherm::kMaxDim];
    smallherm::eigvals(n, dst, w);
    margin[p] = w[0];
  });
  r.min_margin = margin[0];
  r.argmin = 0;
  for (std::size_t p = 1; p < G.size(); ++p)
    if (margin[p] < r.min_margin) {
      r.min_margin = margin[p];
      r.argmin = p;
    }
  return r;
}

ScalarField residual_field(const HermitianField& gfrak, const HermitianField& g,
                           const ScalarField& psi) {
  const Grid& G = gfrak.grid();
  require_same_layout(G, g.grid(), "residual_field");
  require_same_layout(G, psi.grid(), "residual_field");
  const int n = G.n();
  for (std::size_t p = 0; p < G.size(); ++p)
    if (!(psi[p] > 0.0))
      fail(errc::config_error,
           "psi must be strictly positive; psi = " + std::to_string(psi[p]) +
               " at grid index " + G.index_string(p));
  ScalarField out(G);
  std::atomic<std::size_t> bad{kNoIndex};
  parallel_for(G.size(), [&](std::size_t p) {
    cxd L[smallherm::kMaxDim * smallherm::kMaxDim];
    std::memcpy(L, gfrak.at(p), sizeof(cxd) * std::size_t(n) * std::size_t(n));
    if (!smallherm::cholesky(n, L)) {
      atomic_min_index(bad, p);
      return;
    }
    out[p] = smallherm::trace_inv_times(n, L, g.at(p)) - double(n) / psi[p];
  });
  if (bad.load() != kNoIndex)
    fail(errc::positivity_lost,
         "gfrak (chi + Hess u) is not positive definite at grid index " +
             G.index_string(bad.load()));
  return out;
}

ScalarField hessian_trace_apply(const HermitianField& F, const ScalarField& v) {
  const Grid& G = v.grid();
  require_same_layout(G, F.grid(), "hessian_trace_apply");
  const int n = G.n();
  ScalarField out(G);
  parallel_for(G.size(), [&](std::size_t p) {
    int multi[16];
    G.unravel(p, multi);
    cxd H[smallherm::kMaxDim * smallherm::kMaxDim];
    stencil_detail::hessian_point(G, v.data(), p, multi, H);
    out[p] = stencil_detail::herm_trace_product(n, F.at(p), H);
  });
  return out;
}

namespace {

// Shared worker: fills any of grad^2, Laplacian, W (tr_g chi + Lap) that are
// non-null (W requires chi). NonPositiveMetric (naming the first index) when
// some g block is not positive definite.
void pointwise_scalars(const char* what, const ScalarField& u,
                       const HermitianField* chi, const HermitianField& g,
                       ScalarField* grad2, ScalarField* lap, ScalarField* W) {
  const Grid& G = u.grid();
  require_same_layout(G, g.grid(), what);
  if (chi) require_same_layout(G, chi->grid(), what);
  if (W && !chi) fail(errc::config_error, "W field requested without chi");
  const int n = G.n();
  std::atomic<std::size_t> bad{kNoIndex};
  parallel_for(G.size(), [&](std::size_t p) {
    int multi[16];
    G.unravel(p, multi);
    cxd L[smallherm::kMaxDim * smallherm::kMaxDim];
    std::memcpy(L, g.at(p), sizeof(cxd) * std::size_t(n) * std::size_t(n));
    if (!smallherm::cholesky(n, L)) {
      atomic_min_index(bad, p);
      return;
    }
    if (grad2) {
      cxd w[smallherm::kMaxDim], y[smallherm::kMaxDim];
      stencil_detail::gradient_point(G, u.data(), p, multi, w);
      for (int i = 0; i < n; ++i) y[i] = w[i];
      smallherm::chol_solve_vec(n, L, y);
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += w[i].real() * y[i].real() + w[i].imag() * y[i].imag();
      (*grad2)[p] = acc;
    }
    if (lap || W) {
      cxd H[smallherm::kMaxDim * smallherm::kMaxDim];
      stencil_detail::hessian_point(G, u.data(), p, multi, H);
      const double du = smallherm::trace_inv_times(n, L, H);
      if (lap) (*lap)[p] = du;
      if (W) (*W)[p] = smallherm::trace_inv_times(n, L, chi->at(p)) + du;
    }
  });
  if (bad.load() != kNoIndex)
    fail(errc::non_positive_metric,
         "metric g is not positive definite at grid index " +
             G.index_string(bad.load()));
}

}  // namespace

Diagnostics diagnostics(const ScalarField& u, const HermitianField& chi,
                        const HermitianField& g) {
  const Grid& G = u.grid();
  Diagnostics d;
  ScalarField grad2(G), lap(G);
  d.W_field = ScalarField(G);
  pointwise_scalars("diagnostics", u, &chi, g, &grad2, &lap, &d.W_field);
  double umin = u[0], umax = u[0], g2max = 0.0, lmax = 0.0;
  double bg2max = 0.0, blmax = 0.0;
  for (std::size_t p = 0; p < G.size(); ++p) {
    umin = std::min(umin, u[p]);
    umax = std::max(umax, u[p]);
    g2max = std::max(g2max, grad2[p]);
    lmax = std::max(lmax, std::abs(lap[p]));
    if (!G.periodic() && G.is_boundary(p)) {
      bg2max = std::max(bg2max, grad2[p]);
      blmax = std::max(blmax, std::abs(lap[p]));
    }
  }
  d.osc = umax - umin;
  d.grad_max = std::sqrt(g2max);
  d.lap_max = lmax;
  d.boundary_grad_max = std::sqrt(bg2max);
  d.boundary_lap_max = blmax;
  return d;
}

ScalarField grad_squared_field(const ScalarField& u, const HermitianField& g) {
  ScalarField out(u.grid());
  pointwise_scalars("grad_squared_field", u, nullptr, g, &out, nullptr, nullptr);
  return out;
}

ScalarField laplacian_field(const ScalarField& u, const HermitianField& g) {
  ScalarField out(u.grid());
  pointwise_scalars("laplacian_field", u, nullptr, g, nullptr, &out, nullptr);
  return out;
}

ScalarField d1_field(const ScalarField& f, int axis) {
  const Grid& G = f.grid();
  if (axis < 0 || axis >= G.axes())
    fail(errc::config_error, "d1_field axis out of range");
  ScalarField out(G);
  parallel_for(G.size(), [&](std::size_t p) {
    int multi[16];
    G.unravel(p, multi);
    out[p] = stencil_detail::d1_point(G, f.data(), p, multi[axis], axis);
  });
  return out;
}

double mean_value(const ScalarField& u) {
  return deterministic_sum(u.size(), [&](std::size_t p) { return u[p]; }) /
         double(u.size());
}

ScalarField mean_zero(const ScalarField& u) {
  if (!u.grid().periodic())
    fail(errc::box_grid_unsupported,
         "mean_zero is defined on periodic grids only (the box problem pins "
         "u on the boundary instead)");
  const double m = mean_value(u);
  ScalarField out = u;
  parallel_for(out.size(), [&](std::size_t p) { out[p] -= m; });
  return out;
}

double sup_norm(const ScalarField& f) {
  return deterministic_max(f.size(), [&](std::size_t p) { return std::abs(f[p]); });
}

double sup_norm_interior(const ScalarField& f) {
  const Grid& G = f.grid();
  if (G.periodic()) return sup_norm(f);
  return deterministic_max(f.size(), [&](std::size_t p) {
    return G.is_boundary(p) ? 0.0 : std::abs(f[p]);
  });
}

}  // namespace jeq
