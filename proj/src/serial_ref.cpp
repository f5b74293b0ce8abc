#include "jeq/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "jeq/smallherm.hpp"
#include "stencil_impl.hpp"

namespace jeq::serial {

namespace {

using stencil_detail::cxd;

// Same chunked association as jeq::deterministic_sum / deterministic_max
// (4096-element chunks combined in index order), executed serially.
constexpr std::size_t kChunk = 4096;

template <class F>
double chunked_sum(std::size_t count, F&& term) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < count; lo += kChunk) {
    const std::size_t hi = std::min(count, lo + kChunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    total += s;
  }
  return total;
}

}  // namespace

HermitianField complex_hessian(const ScalarField& u) {
  const Grid& G = u.grid();
  HermitianField out(G);
  int multi[16];
  for (std::size_t p = 0; p < G.size(); ++p) {
    G.unravel(p, multi);
    stencil_detail::hessian_point(G, u.data(), p, multi, out.at(p));
  }
  return out;
}

GfrakField gfrak_field(const HermitianField& chi, const ScalarField& u) {
  const Grid& G = u.grid();
  require_same_layout(G, chi.grid(), "serial gfrak_field");
  const int n = G.n();
  GfrakField r{HermitianField(G), 0.0, 0};
  int multi[16];
  bool first = true;
  for (std::size_t p = 0; p < G.size(); ++p) {
    G.unravel(p, multi);
    cxd* dst = r.field.at(p);
    stencil_detail::hessian_point(G, u.data(), p, multi, dst);
    const cxd* c = chi.at(p);
    for (int k = 0; k < n * n; ++k) dst[k] += c[k];
    double w[smallherm::kMaxDim];
    smallherm::eigvals(n, dst, w);
    if (first || w[0] < r.min_margin) {
      r.min_margin = w[0];
      r.argmin = p;
      first = false;
    }
  }
  return r;
}

ScalarField residual_field(const HermitianField& gfrak, const HermitianField& g,
                           const ScalarField& psi) {
  const Grid& G = gfrak.grid();
  require_same_layout(G, g.grid(), "serial residual_field");
  require_same_layout(G, psi.grid(), "serial residual_field");
  const int n = G.n();
  for (std::size_t p = 0; p < G.size(); ++p)
    if (!(psi[p] > 0.0))
      fail(errc::config_error,
           "psi must be strictly positive; psi = " + std::to_string(psi[p]) +
               " at grid index " + G.index_string(p));
  ScalarField out(G);
  for (std::size_t p = 0; p < G.size(); ++p) {
    cxd L[smallherm::kMaxDim * smallherm::kMaxDim];
    std::memcpy(L, gfrak.at(p), sizeof(cxd) * std::size_t(n) * std::size_t(n));
    if (!smallherm::cholesky(n, L))
      fail(errc::positivity_lost,
           "gfrak (chi + Hess u) is not positive definite at grid index " +
               G.index_string(p));
    out[p] = smallherm::trace_inv_times(n, L, g.at(p)) - double(n) / psi[p];
  }
  return out;
}

ScalarField hessian_trace_apply(const HermitianField& F, const ScalarField& v) {
  const Grid& G = v.grid();
  require_same_layout(G, F.grid(), "serial hessian_trace_apply");
  const int n = G.n();
  ScalarField out(G);
  int multi[16];
  for (std::size_t p = 0; p < G.size(); ++p) {
    G.unravel(p, multi);
    cxd H[smallherm::kMaxDim * smallherm::kMaxDim];
    stencil_detail::hessian_point(G, v.data(), p, multi, H);
    out[p] = stencil_detail::herm_trace_product(n, F.at(p), H);
  }
  return out;
}

double mean_value(const ScalarField& u) {
  return chunked_sum(u.size(), [&](std::size_t p) { return u[p]; }) /
         double(u.size());
}

double sup_norm(const ScalarField& f) {
  double m = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) m = std::max(m, std::abs(f[p]));
  return m;
}

}  // namespace jeq::serial
