#include "jeq/chern.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <mutex>
#include <span>
#include <utility>

#include "jeq/error.hpp"
#include "jeq/parallel.hpp"
#include "jeq/rng.hpp"
#include "jeq/smallherm.hpp"

namespace jeq {
namespace {

using smallherm::kMaxDim;

std::size_t idx3(int n, int i, int j, int k) { return (std::size_t(i) * n + j) * n + k; }
std::size_t idx4(int n, int i, int j, int k, int l) {
  return ((std::size_t(i) * n + j) * n + k) * n + l;
}

// First-derivative value at the base point: the degree-1 Taylor coefficient.
// pos < nv addresses d/dw_pos, pos >= nv addresses d/dwbar_{pos-nv}.
cxd dcoef1(const TaylorJet& f, int pos) {
  std::array<std::uint8_t, 2 * kJetMaxVars> e{};
  e[std::size_t(pos)] = 1;
  return f.coeff(std::span<const std::uint8_t>(e.data(), std::size_t(2 * f.nvars())));
}

// Mixed second derivative at the base point (two distinct variable slots).
cxd dcoef2(const TaylorJet& f, int pa, int pb) {
  std::array<std::uint8_t, 2 * kJetMaxVars> e{};
  e[std::size_t(pa)] += 1;
  e[std::size_t(pb)] += 1;
  const double fac = (pa == pb) ? 2.0 : 1.0;
  return fac * f.coeff(std::span<const std::uint8_t>(e.data(), std::size_t(2 * f.nvars())));
}

void base_matrix(const MetricJet& m, cxd* g0) {
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) g0[i * m.n + j] = m.at(i, j).value();
}

// G(0)^{-1}; throws NonPositiveMetric.
void base_inverse(const MetricJet& m, cxd* ginv0) {
  std::array<cxd, kMaxDim * kMaxDim> L{};
  base_matrix(m, L.data());
  if (!smallherm::cholesky(m.n, L.data()))
    fail(errc::non_positive_metric, "metric not positive definite at the base point");
  smallherm::inverse_from_chol(m.n, L.data(), ginv0);
}

std::vector<TaylorJet> identity_jets(int nv, int n) {
  std::vector<TaylorJet> out(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[std::size_t(i) * n + j] = TaylorJet::constant(nv, i == j ? 1.0 : 0.0);
  return out;
}

std::vector<TaylorJet> jmatmul(int n, const std::vector<TaylorJet>& A,
                               const std::vector<TaylorJet>& B) {
  std::vector<TaylorJet> C(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TaylorJet s = A[std::size_t(i) * n] * B[std::size_t(0) + j];
      for (int k = 1; k < n; ++k) s += A[std::size_t(i) * n + k] * B[std::size_t(k) * n + j];
      C[std::size_t(i) * n + j] = std::move(s);
    }
  return C;
}

// Jet inverse of the metric matrix. Writing G = G0 (I + E) with E free of
// constant term, (I + E)^{-1} = I - E + E^2 - E^3 + E^4 is exact at the jet
// truncation order, so no iteration control is needed.
std::vector<TaylorJet> inverse_jets(const MetricJet& m, const cxd* ginv0) {
  const int n = m.n;
  const int nv = m.entries.front().nvars();
  std::array<cxd, kMaxDim * kMaxDim> g0{};
  base_matrix(m, g0.data());

  std::vector<TaylorJet> E(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TaylorJet s = TaylorJet::constant(nv, 0.0);
      for (int k = 0; k < n; ++k) {
        TaylorJet t = m.at(k, j);
        t += TaylorJet::constant(nv, -g0[std::size_t(k) * n + j]);
        s += ginv0[std::size_t(i) * n + k] * t;
      }
      E[std::size_t(i) * n + j] = std::move(s);
    }

  std::vector<TaylorJet> S = identity_jets(nv, n);
  for (int it = 0; it < kJetOrder; ++it) {
    std::vector<TaylorJet> ES = jmatmul(n, E, S);
    S = identity_jets(nv, n);
    for (std::size_t q = 0; q < ES.size(); ++q) S[q] -= ES[q];
  }

  std::vector<TaylorJet> G(std::size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TaylorJet s = TaylorJet::constant(nv, 0.0);
      for (int k = 0; k < n; ++k) s += ginv0[std::size_t(k) * n + j] * S[std::size_t(i) * n + k];
      G[std::size_t(i) * n + j] = std::move(s);
    }
  return G;
}

ConnectionData compute_connection(const MetricJet& m, const cxd* ginv0) {
  const int n = m.n;
  const int nv = m.entries.front().nvars();
  ConnectionData cd;
  cd.n = n;
  cd.Gamma.assign(std::size_t(n) * n * n, cxd(0));
  cd.T.assign(std::size_t(n) * n * n, cxd(0));
  cd.R.assign(std::size_t(n) * n * n * n, cxd(0));

  // dG[i](j,l) = d_i g_{j lb},  dbG[j](k,l) = db_j g_{k lb} at the base
  std::vector<cxd> dG(std::size_t(n) * n * n), dbG(std::size_t(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        dG[idx3(n, i, j, l)] = dcoef1(m.at(j, l), i);
        dbG[idx3(n, i, j, l)] = dcoef1(m.at(j, l), nv + i);
      }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        cxd s(0);
        for (int l = 0; l < n; ++l)
          s += dG[idx3(n, i, j, l)] * ginv0[std::size_t(l) * n + k];
        cd.Gamma[idx3(n, i, j, k)] = s;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        cd.T[idx3(n, i, j, k)] = cd.Gamma[idx3(n, i, j, k)] - cd.Gamma[idx3(n, j, i, k)];

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cxd s = -dcoef2(m.at(k, l), i, nv + j);
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              s += ginv0[std::size_t(q) * n + p] * dG[idx3(n, i, k, q)] *
                   dbG[idx3(n, j, p, l)];
          cd.R[idx4(n, i, j, k, l)] = s;
        }
  return cd;
}

// Caches the connection, the base inverse, and (optionally) the jet-level
// connection coefficients so several scalars can be processed against the
// same metric without redoing the matrix inverse.
struct CovariantEngine {
  int n = 0, nv = 0, mord = -1;
  ConnectionData conn;
  std::array<cxd, kMaxDim * kMaxDim> ginv0{};
  std::vector<TaylorJet> gamma_jets;   // [a][b][c] = jet of Gamma^c_{ab}
  std::vector<TaylorJet> cgamma_jets;  // conjugate jets, same layout

  CovariantEngine(const MetricJet& m, bool with_jets) {
    if (m.n < 1 || m.entries.size() != std::size_t(m.n) * m.n)
      fail(errc::config_error, "metric jet matrix is malformed");
    n = m.n;
    nv = m.entries.front().nvars();
    mord = m.order();
    if (mord < 2) fail(errc::insufficient_order, "metric jets of order >= 2 required");
    base_inverse(m, ginv0.data());
    conn = compute_connection(m, ginv0.data());
    if (!with_jets) return;

    if (mord < 3)
      fail(errc::insufficient_order,
           "metric jets of order >= 3 required for covariant derivatives");
    std::vector<TaylorJet> Ginv = inverse_jets(m, ginv0.data());
    gamma_jets.resize(std::size_t(n) * n * n);
    cgamma_jets.resize(std::size_t(n) * n * n);
    for (int a = 0; a < n; ++a) {
      std::vector<TaylorJet> Ma(std::size_t(n) * n);
      for (int b = 0; b < n; ++b)
        for (int l = 0; l < n; ++l) Ma[std::size_t(b) * n + l] = m.at(b, l).dz(a);
      std::vector<TaylorJet> P = jmatmul(n, Ma, Ginv);
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          gamma_jets[idx3(n, a, b, c)] = P[std::size_t(b) * n + c];
          cgamma_jets[idx3(n, a, b, c)] = gamma_jets[idx3(n, a, b, c)].conjugate();
        }
    }
  }

  // g^{p qb} = (G(0)^{-1})[q][p]
  cxd gup(int p, int q) const { return ginv0[std::size_t(q) * n + p]; }

  CovariantDerivatives derivatives(const TaylorJet& v) const;
  void accumulate_residuals(const TaylorJet& v, CommutationResiduals& out) const;
};

CovariantDerivatives CovariantEngine::derivatives(const TaylorJet& v) const {
  if (!v.valid() || v.nvars() != n)
    fail(errc::config_error, "scalar jet does not match the metric dimension");
  if (v.order() < 4) fail(errc::insufficient_order, "scalar jet of order 4 required");

  std::vector<TaylorJet> v2(std::size_t(n) * n);
  {
    std::vector<TaylorJet> dv{std::size_t(n), TaylorJet{}};
    for (int i = 0; i < n; ++i) dv[std::size_t(i)] = v.dz(i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v2[std::size_t(i) * n + j] = dv[std::size_t(i)].dzb(j);
  }

  std::vector<TaylorJet> v3(std::size_t(n) * n * n), v3b(std::size_t(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        TaylorJet s = v2[std::size_t(i) * n + j].dz(k);
        for (int p = 0; p < n; ++p)
          s -= gamma_jets[idx3(n, k, i, p)] * v2[std::size_t(p) * n + j];
        v3[idx3(n, i, j, k)] = std::move(s);

        TaylorJet sb = v2[std::size_t(i) * n + j].dzb(k);
        for (int q = 0; q < n; ++q)
          sb -= cgamma_jets[idx3(n, k, j, q)] * v2[std::size_t(i) * n + q];
        v3b[idx3(n, i, j, k)] = std::move(sb);
      }

  CovariantDerivatives d;
  d.n = n;
  d.d2.resize(std::size_t(n) * n);
  d.d3.resize(std::size_t(n) * n * n);
  d.d3b.resize(std::size_t(n) * n * n);
  d.d4.resize(std::size_t(n) * n * n * n);
  d.d4r.resize(std::size_t(n) * n * n * n);
  for (std::size_t q = 0; q < v2.size(); ++q) d.d2[q] = v2[q].value();
  for (std::size_t q = 0; q < v3.size(); ++q) {
    d.d3[q] = v3[q].value();
    d.d3b[q] = v3b[q].value();
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cxd a = dcoef1(v3[idx3(n, i, j, k)], nv + l);
          for (int q = 0; q < n; ++q)
            a -= std::conj(conn.gamma(l, j, q)) * d.d3[idx3(n, i, q, k)];
          d.d4[idx4(n, i, j, k, l)] = a;

          cxd b = dcoef1(v3b[idx3(n, i, j, l)], k);
          for (int p = 0; p < n; ++p)
            b -= conn.gamma(k, i, p) * d.d3b[idx3(n, p, j, l)];
          d.d4r[idx4(n, i, j, k, l)] = b;
        }
  return d;
}

void CovariantEngine::accumulate_residuals(const TaylorJet& v,
                                           CommutationResiduals& out) const {
  const CovariantDerivatives d = derivatives(v);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        cxd rhs(0);
        for (int l = 0; l < n; ++l) rhs += conn.torsion(i, k, l) * d.v2(l, j);
        const cxd lhs = d.v3(i, j, k) - d.v3(k, j, i);
        out.third = std::max(out.third, std::abs(lhs - rhs));
        out.third_scale = std::max({out.third_scale, std::abs(d.v3(i, j, k)),
                                    std::abs(d.v3(k, j, i)), std::abs(rhs)});

        cxd rhsb(0);
        for (int l = 0; l < n; ++l) rhsb += std::conj(conn.torsion(j, k, l)) * d.v2(i, l);
        const cxd lhsb = d.v3b(i, j, k) - d.v3b(i, k, j);
        out.third = std::max(out.third, std::abs(lhsb - rhsb));
        out.third_scale = std::max({out.third_scale, std::abs(d.v3b(i, j, k)),
                                    std::abs(d.v3b(i, k, j)), std::abs(rhsb)});
      }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cxd t1(0), t2(0);
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
              t1 += gup(p, q) * conn.curv(k, l, i, q) * d.v2(p, j);
              t2 += gup(p, q) * conn.curv(k, l, p, j) * d.v2(i, q);
            }
          const cxd lhs = d.v4(i, j, k, l) - d.v4r(i, j, k, l);
          out.fourth_mixed = std::max(out.fourth_mixed, std::abs(lhs - (t1 - t2)));
          out.fourth_mixed_scale =
              std::max({out.fourth_mixed_scale, std::abs(d.v4(i, j, k, l)),
                        std::abs(d.v4r(i, j, k, l)), std::abs(t1), std::abs(t2)});
        }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          cxd t1(0), t4(0);
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
              t1 += gup(p, q) * (conn.curv(k, l, i, q) * d.v2(p, j) -
                                 conn.curv(i, j, k, q) * d.v2(p, l));
              t4 += conn.torsion(i, k, p) * std::conj(conn.torsion(j, l, q)) * d.v2(p, q);
            }
          cxd t2(0), t3(0);
          for (int p = 0; p < n; ++p) t2 += conn.torsion(i, k, p) * d.v3b(p, j, l);
          for (int q = 0; q < n; ++q) t3 += std::conj(conn.torsion(j, l, q)) * d.v3(i, q, k);
          const cxd lhs = d.v4(i, j, k, l) - d.v4(k, l, i, j);
          const cxd rhs = t1 + t2 + t3 - t4;
          out.fourth_pairs = std::max(out.fourth_pairs, std::abs(lhs - rhs));
          out.fourth_pairs_scale =
              std::max({out.fourth_pairs_scale, std::abs(d.v4(i, j, k, l)),
                        std::abs(d.v4(k, l, i, j)), std::abs(t1), std::abs(t2),
                        std::abs(t3), std::abs(t4)});
        }
}

}  // namespace

int MetricJet::order() const {
  if (entries.empty()) return -1;
  int o = kJetOrder;
  for (const auto& e : entries) o = std::min(o, e.order());
  return o;
}

MetricJet make_metric_jet(int n, std::vector<TaylorJet> entries) {
  if (n < 1 || n > kJetMaxVars)
    fail(errc::config_error, "metric dimension out of range");
  if (entries.size() != std::size_t(n) * n)
    fail(errc::config_error, "metric jet matrix needs n*n entries");
  for (const auto& e : entries) {
    if (!e.valid() || e.nvars() != n)
      fail(errc::config_error, "metric jet entry has the wrong dimension");
  }
  double scale = 0;
  for (const auto& e : entries) scale = std::max(scale, e.max_abs_coeff());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      TaylorJet diff = entries[std::size_t(i) * n + j];
      diff -= entries[std::size_t(j) * n + i].conjugate();
      if (diff.max_abs_coeff() > 1e-12 * std::max(1.0, scale))
        fail(errc::config_error, "metric jets are not conjugate-symmetric");
    }
  MetricJet m;
  m.n = n;
  m.entries = std::move(entries);
  std::array<cxd, kMaxDim * kMaxDim> L{};
  base_matrix(m, L.data());
  if (!smallherm::cholesky(n, L.data()))
    fail(errc::non_positive_metric, "metric not positive definite at the base point");
  return m;
}

ConnectionData connection(const MetricJet& m) {
  CovariantEngine eng(m, /*with_jets=*/false);
  return std::move(eng.conn);
}

CovariantDerivatives covariant_derivatives(const TaylorJet& v, const MetricJet& m) {
  CovariantEngine eng(m, /*with_jets=*/true);
  return eng.derivatives(v);
}

CommutationResiduals commutation_residuals(const TaylorJet& v, const MetricJet& m) {
  CovariantEngine eng(m, /*with_jets=*/true);
  CommutationResiduals out;
  eng.accumulate_residuals(v, out);
  return out;
}

namespace {

struct Coords {
  int n = 0;
  std::vector<TaylorJet> z, zb;
};

// z_i = p_i + sum_k B[i][k] w_k (B = nullptr means the identity substitution)
Coords make_coords(int n, const std::vector<cxd>& p, const cxd* B) {
  Coords c;
  c.n = n;
  c.z.reserve(std::size_t(n));
  c.zb.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    TaylorJet zi = TaylorJet::constant(n, p[std::size_t(i)]);
    if (B) {
      for (int k = 0; k < n; ++k)
        zi += B[std::size_t(i) * n + k] * TaylorJet::variable(n, k, 0.0);
    } else {
      zi += TaylorJet::variable(n, i, 0.0);
    }
    c.zb.push_back(zi.conjugate());
    c.z.push_back(std::move(zi));
  }
  return c;
}

TaylorJet sigma_jet(const Coords& c, int from = 0) {
  TaylorJet s = TaylorJet::constant(c.n, 0.0);
  for (int k = from; k < c.n; ++k) s += c.z[std::size_t(k)] * c.zb[std::size_t(k)];
  return s;
}

// Unnormalized catalog entries. Coefficients are small enough that every
// base matrix with |p_i| <= 0.5 per coordinate is strictly diagonally
// dominant, hence positive definite.
std::vector<TaylorJet> entry_raw(const std::string& entry, const Coords& c) {
  const int n = c.n;
  std::vector<TaylorJet> G(std::size_t(n) * n);

  if (entry == "flat") {
    return identity_jets(n, n);
  }

  if (entry == "conformal-exp") {
    // e^{|z|^2} delta_{ij}; the shared conformal factor is exp'd once
    TaylorJet s = sigma_jet(c);
    TaylorJet E = TaylorJet::exp(s);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        G[std::size_t(i) * n + j] = (i == j) ? E : TaylorJet::constant(n, 0.0);
    return G;
  }

  if (entry == "kahler-potential") {
    // complex Hessian of |z|^2 + (a/4)|z|^4 + (cc/4)(z_1^2 zb_2^2 + conj)
    const double a = 0.3, cc = 0.2;
    TaylorJet s = sigma_jet(c);
    TaylorJet diag = TaylorJet::constant(n, 1.0) + (0.5 * a) * s;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        TaylorJet t = (0.5 * a) * (c.zb[std::size_t(i)] * c.z[std::size_t(j)]);
        if (i == j) t += diag;
        G[std::size_t(i) * n + j] = std::move(t);
      }
    if (n >= 2) {
      G[1] += cc * (c.z[0] * c.zb[1]);
      G[std::size_t(n)] += cc * (c.zb[0] * c.z[1]);
    }
    return G;
  }

  if (entry == "perturbed-hermitian") {
    // Hermitian but not a complex Hessian: the zb_1 term in g_{1 2b} has no
    // matching z-derivative partner, so the torsion is generically nonzero.
    const double a = 0.25, b = 0.2, cc = 0.3, ee = 0.15;
    TaylorJet s = sigma_jet(c);
    TaylorJet diag = TaylorJet::constant(n, 1.0) + a * s;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        TaylorJet t = b * (c.zb[std::size_t(i)] * c.z[std::size_t(j)]);
        if (i == j) t += diag;
        G[std::size_t(i) * n + j] = std::move(t);
      }
    if (n >= 2) {
      G[1] += cc * c.zb[0];
      G[1] += ee * (c.z[0] * (c.zb[1] * c.zb[1]));
      G[std::size_t(n)] += cc * c.z[0];
      G[std::size_t(n)] += ee * (c.zb[0] * (c.z[1] * c.z[1]));
    }
    return G;
  }

  if (entry == "product") {
    // one curved line times a curved (n-1)-dimensional Kahler block
    const double a = 0.4, b = 0.3;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G[std::size_t(i) * n + j] = TaylorJet::constant(n, 0.0);
    G[0] += TaylorJet::constant(n, 1.0) + a * (c.z[0] * c.zb[0]);
    if (n >= 2) {
      TaylorJet s2 = sigma_jet(c, 1);
      TaylorJet diag = TaylorJet::constant(n, 1.0) + (0.5 * b) * s2;
      for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
          TaylorJet t = (0.5 * b) * (c.zb[std::size_t(i)] * c.z[std::size_t(j)]);
          if (i == j) t += diag;
          G[std::size_t(i) * n + j] = std::move(t);
        }
    }
    return G;
  }

  fail(errc::unknown_entry, "unknown catalog entry: " + entry);
}

bool entry_torsion_free(const std::string& entry, int n) {
  if (n == 1) return true;  // a single antisymmetric pair of indices
  return entry == "flat" || entry == "kahler-potential" || entry == "product";
}

// G' = Z M Z^H entrywise with a constant matrix Z, then exact
// re-hermitization (the summation order can leave 1-ulp asymmetries).
std::vector<TaylorJet> congruence(int n, const cxd* Z, const std::vector<TaylorJet>& M) {
  std::vector<TaylorJet> G(std::size_t(n) * n);
  const int nv = M.front().nvars();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      TaylorJet s = TaylorJet::constant(nv, 0.0);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const cxd w = Z[std::size_t(i) * n + a] * std::conj(Z[std::size_t(j) * n + b]);
          if (w != cxd(0)) s += w * M[std::size_t(a) * n + b];
        }
      G[std::size_t(i) * n + j] = std::move(s);
    }
  for (int i = 0; i < n; ++i) {
    TaylorJet d = 0.5 * (G[std::size_t(i) * n + i] + G[std::size_t(i) * n + i].conjugate());
    G[std::size_t(i) * n + i] = std::move(d);
    for (int j = i + 1; j < n; ++j) {
      TaylorJet avg =
          0.5 * (G[std::size_t(i) * n + j] + G[std::size_t(j) * n + i].conjugate());
      G[std::size_t(j) * n + i] = avg.conjugate();
      G[std::size_t(i) * n + j] = std::move(avg);
    }
  }
  return G;
}

void add_scalars(const Coords& c, CatalogResult& out) {
  const int n = c.n;
  TaylorJet s = sigma_jet(c);

  out.scalar_names.push_back("quadratic");
  out.scalars.push_back(s);

  TaylorJet q = s * s;
  TaylorJet w = (n >= 2) ? (c.z[0] * c.z[0]) * (c.zb[1] * c.zb[1])
                         : (c.z[0] * c.z[0]) * (c.z[0] * c.z[0]);
  q += 0.25 * (w + w.conjugate());
  out.scalar_names.push_back("quartic");
  out.scalars.push_back(std::move(q));

  const int m2 = (n >= 2) ? 1 : 0;
  TaylorJet x0 = 0.5 * (c.z[0] + c.zb[0]);
  TaylorJet ym = cxd(0.0, -0.5) * (c.z[std::size_t(m2)] - c.zb[std::size_t(m2)]);
  out.scalar_names.push_back("trig");
  out.scalars.push_back(TaylorJet::sin(x0) * TaylorJet::cos(ym));

  TaylorJet mp = (n >= 2) ? (c.z[0] * c.z[0]) * c.zb[1] : (c.z[0] * c.z[0]) * c.z[0];
  TaylorJet mixed = 0.5 * (mp + mp.conjugate());
  mixed += 0.3 * s;
  out.scalar_names.push_back("mixed-poly");
  out.scalars.push_back(std::move(mixed));

  TaylorJet yl = cxd(0.0, -0.5) * (c.z[std::size_t(n - 1)] - c.zb[std::size_t(n - 1)]);
  TaylorJet arg = 0.7 * x0;
  arg -= 0.4 * yl;
  arg += 0.2 * s;
  out.scalar_names.push_back("exp-poly");
  out.scalars.push_back(TaylorJet::exp(arg));
}

}  // namespace

std::vector<std::string> catalog_entries() {
  return {"flat", "conformal-exp", "kahler-potential", "perturbed-hermitian", "product"};
}

CatalogResult catalog(const std::string& entry, const std::vector<double>& base_point) {
  {
    const auto names = catalog_entries();
    if (std::find(names.begin(), names.end(), entry) == names.end())
      fail(errc::unknown_entry, "unknown catalog entry: " + entry);
  }
  if (base_point.empty() || base_point.size() % 2 != 0)
    fail(errc::config_error, "base point needs 2n coordinates");
  const int n = int(base_point.size() / 2);
  if (n > kJetMaxVars) fail(errc::config_error, "base point dimension too large");
  std::vector<cxd> p(std::size_t(n), cxd(0));
  for (int i = 0; i < n; ++i)
    p[std::size_t(i)] = cxd(base_point[std::size_t(i)], base_point[std::size_t(n + i)]);

  CatalogResult out;
  out.entry = entry;
  out.torsion_free = entry_torsion_free(entry, n);
  // flat and conformal-exp keep their defining frame (the normalization is a
  // constant scalar there); the rest are normalized by the coordinate change
  // z = p + Z^T w, which keeps potential-built metrics potential-built.
  out.coordinates_rotated = !(entry == "flat" || entry == "conformal-exp");

  Coords c0 = make_coords(n, p, nullptr);
  std::vector<TaylorJet> M = entry_raw(entry, c0);

  std::array<cxd, kMaxDim * kMaxDim> L{};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L[std::size_t(i) * n + j] = M[std::size_t(i) * n + j].value();
  if (!smallherm::cholesky(n, L.data()))
    fail(errc::non_positive_metric, "catalog base point gives a non-positive metric");
  out.normalizer.assign(std::size_t(n) * n, cxd(0));
  smallherm::tri_inverse_lower(n, L.data(), out.normalizer.data());

  Coords c = std::move(c0);
  if (out.coordinates_rotated) {
    std::vector<cxd> B(std::size_t(n) * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) B[std::size_t(i) * n + k] = out.normalizer[std::size_t(k) * n + i];
    c = make_coords(n, p, B.data());
    M = entry_raw(entry, c);
  }
  out.metric = make_metric_jet(n, congruence(n, out.normalizer.data(), M));
  add_scalars(c, out);
  return out;
}

IdentitySuiteResult identity_suite(int n, int points, std::uint64_t seed) {
  if (n < 1 || n > kJetMaxVars) fail(errc::config_error, "dimension out of range");
  if (points < 1) fail(errc::config_error, "need at least one sample point");

  const auto names = catalog_entries();
  const int ne = int(names.size());

  IdentitySuiteResult res;
  res.n = n;
  res.points = points;
  res.seed = seed;
  res.entries.resize(std::size_t(ne));
  for (int e = 0; e < ne; ++e) {
    res.entries[std::size_t(e)].entry = names[std::size_t(e)];
    res.entries[std::size_t(e)].torsion_free = entry_torsion_free(names[std::size_t(e)], n);
  }

  JetLayout::get(n);  // warm the layout cache before the parallel region

  std::vector<EntryIdentityReport> acc(std::size_t(points) * ne);
  std::mutex err_mu;
  std::exception_ptr first_error;

  parallel_for(std::size_t(points), [&](std::size_t pt) {
    try {
      rng r(seed + 0x9e3779b97f4a7c15ull * (pt + 1));
      std::vector<double> bp(std::size_t(2 * n));
      for (auto& x : bp) x = r.uniform(-0.35, 0.35);
      for (int e = 0; e < ne; ++e) {
        CatalogResult cat = catalog(names[std::size_t(e)], bp);
        CovariantEngine eng(cat.metric, /*with_jets=*/true);
        EntryIdentityReport& a = acc[pt * std::size_t(ne) + std::size_t(e)];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
              a.torsion_antisym = std::max(
                  a.torsion_antisym,
                  std::abs(eng.conn.torsion(i, j, k) + eng.conn.torsion(j, i, k)));
              a.torsion_max = std::max(a.torsion_max, std::abs(eng.conn.torsion(i, j, k)));
              for (int l = 0; l < n; ++l)
                a.curvature_conj =
                    std::max(a.curvature_conj,
                             std::abs(eng.conn.curv(i, j, k, l) -
                                      std::conj(eng.conn.curv(j, i, l, k))));
            }
        CommutationResiduals cr;
        for (const auto& v : cat.scalars) eng.accumulate_residuals(v, cr);
        a.third = cr.third;
        a.fourth_mixed = cr.fourth_mixed;
        a.fourth_pairs = cr.fourth_pairs;
        a.third_rel = cr.third / std::max(1.0, cr.third_scale);
        a.fourth_mixed_rel = cr.fourth_mixed / std::max(1.0, cr.fourth_mixed_scale);
        a.fourth_pairs_rel = cr.fourth_pairs / std::max(1.0, cr.fourth_pairs_scale);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  });
  if (first_error) std::rethrow_exception(first_error);

  for (int pt = 0; pt < points; ++pt)
    for (int e = 0; e < ne; ++e) {
      const EntryIdentityReport& a = acc[std::size_t(pt) * ne + std::size_t(e)];
      EntryIdentityReport& r = res.entries[std::size_t(e)];
      r.third = std::max(r.third, a.third);
      r.fourth_mixed = std::max(r.fourth_mixed, a.fourth_mixed);
      r.fourth_pairs = std::max(r.fourth_pairs, a.fourth_pairs);
      r.third_rel = std::max(r.third_rel, a.third_rel);
      r.fourth_mixed_rel = std::max(r.fourth_mixed_rel, a.fourth_mixed_rel);
      r.fourth_pairs_rel = std::max(r.fourth_pairs_rel, a.fourth_pairs_rel);
      r.torsion_antisym = std::max(r.torsion_antisym, a.torsion_antisym);
      r.curvature_conj = std::max(r.curvature_conj, a.curvature_conj);
      r.torsion_max = std::max(r.torsion_max, a.torsion_max);
    }
  for (const auto& r : res.entries) {
    res.worst_abs = std::max({res.worst_abs, r.third, r.fourth_mixed, r.fourth_pairs});
    res.worst_rel =
        std::max({res.worst_rel, r.third_rel, r.fourth_mixed_rel, r.fourth_pairs_rel});
  }
  return res;
}

}  // namespace jeq
