#pragma once

// Chern connection, torsion, and curvature of a Hermitian metric germ given
// as Taylor jets, covariant derivatives of a scalar through fourth order,
// and the commutation identities that relate the different derivative
// orders. Everything is evaluated at the base point of the jets, so the
// residuals below are limited only by rounding, never by discretization.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "jeq/jet.hpp"

namespace jeq {

// Metric germ: entries[i*n + j] is the jet of g_{i jb} about the base point
// (jb = j-bar). Entries are conjugate-symmetric as jets and the base value
// matrix is positive definite.
struct MetricJet {
  int n = 0;
  std::vector<TaylorJet> entries;  // row-major n x n

  const TaylorJet& at(int i, int j) const { return entries[std::size_t(i) * n + j]; }
  int order() const;  // min entry order
};

// Validates conjugate symmetry (ConfigError) and base positivity
// (NonPositiveMetric).
MetricJet make_metric_jet(int n, std::vector<TaylorJet> entries);

// Connection data at the base point:
//   Gamma^k_{ij} = g^{k lb} d_i g_{j lb}
//   T^k_{ij}     = Gamma^k_{ij} - Gamma^k_{ji}
//   R_{i jb k lb} = -d_i db_j g_{k lb} + g^{p qb} (d_i g_{k qb})(db_j g_{p lb})
struct ConnectionData {
  int n = 0;
  std::vector<cxd> Gamma;  // Gamma[(i*n + j)*n + k] = Gamma^k_{ij}
  std::vector<cxd> T;      // same layout
  std::vector<cxd> R;      // R[((i*n + j)*n + k)*n + l] = R_{i jb k lb}

  cxd gamma(int i, int j, int k) const { return Gamma[(std::size_t(i) * n + j) * n + k]; }
  cxd torsion(int i, int j, int k) const { return T[(std::size_t(i) * n + j) * n + k]; }
  cxd curv(int i, int j, int k, int l) const {
    return R[((std::size_t(i) * n + j) * n + k) * n + l];
  }
};

// Requires metric order >= 2; throws NonPositiveMetric / InsufficientOrder.
ConnectionData connection(const MetricJet& m);

// Covariant derivatives of a scalar v at the base point. Index order follows
// the subscript order:
//   d2[i][j]       = v_{i jb}        = d_i db_j v
//   d3[i][j][k]    = v_{i jb k}      = d_k v_{i jb} - Gamma^l_{ki} v_{l jb}
//   d3b[i][j][k]   = v_{i jb kb}     = db_k v_{i jb} - conj(Gamma^l_{kj}) v_{i lb}
//   d4[i][j][k][l] = v_{i jb k lb}   = db_l v_{i jb k} - conj(Gamma^q_{lj}) v_{i qb k}
//   d4r[i][j][k][l] = v_{i jb lb k}  = d_k v_{i jb lb} - Gamma^p_{ki} v_{p jb lb}
// (d4 and d4r differ only in the order of the last two derivatives; both are
// stored with the same slot convention so they subtract entrywise.)
struct CovariantDerivatives {
  int n = 0;
  std::vector<cxd> d2, d3, d3b, d4, d4r;

  cxd v2(int i, int j) const { return d2[std::size_t(i) * n + j]; }
  cxd v3(int i, int j, int k) const { return d3[(std::size_t(i) * n + j) * n + k]; }
  cxd v3b(int i, int j, int k) const { return d3b[(std::size_t(i) * n + j) * n + k]; }
  cxd v4(int i, int j, int k, int l) const {
    return d4[((std::size_t(i) * n + j) * n + k) * n + l];
  }
  cxd v4r(int i, int j, int k, int l) const {
    return d4r[((std::size_t(i) * n + j) * n + k) * n + l];
  }
};

// Requires v of order >= 4 and metric order >= 3 (InsufficientOrder).
CovariantDerivatives covariant_derivatives(const TaylorJet& v, const MetricJet& m);

// Max |LHS - RHS| over all index tuples for the three commutation
// identities, together with the largest single term participating in each
// (for relative comparisons):
//   third:        v_{i jb k} - v_{k jb i} = T^l_{ik} v_{l jb}
//                 and its conjugate line
//                 v_{i jb kb} - v_{i kb jb} = conj(T^l_{jk}) v_{i lb}
//   fourth_mixed: v_{i jb k lb} - v_{i jb lb k}
//                 = g^{p qb} R_{k lb i qb} v_{p jb} - g^{p qb} R_{k lb p jb} v_{i qb}
//                 (the second curvature factor keeps k in the first slot;
//                 swapping it with p is a spurious symmetry that only holds
//                 when the torsion vanishes)
//   fourth_pairs: v_{i jb k lb} - v_{k lb i jb}
//                 = g^{p qb} (R_{k lb i qb} v_{p jb} - R_{i jb k qb} v_{p lb})
//                   + T^p_{ik} v_{p jb lb} + conj(T^q_{jl}) v_{i qb k}
//                   - T^p_{ik} conj(T^q_{jl}) v_{p qb}
struct CommutationResiduals {
  double third = 0, fourth_mixed = 0, fourth_pairs = 0;
  double third_scale = 0, fourth_mixed_scale = 0, fourth_pairs_scale = 0;
};

CommutationResiduals commutation_residuals(const TaylorJet& v, const MetricJet& m);

// Test-metric catalog. Every entry is normalized so the metric equals the
// identity at the base point; `normalizer` records the constant matrix Z
// with Z g(p) Z^H = I. For the entries marked `coordinates_rotated` the
// normalization is realized as the holomorphic coordinate change
// z = p + Z^T w, which preserves structural properties (a metric built from
// a potential stays torsion-free). The conformal entry is normalized by a
// scalar factor instead, keeping the frame of the defining coordinates.
struct CatalogResult {
  std::string entry;
  MetricJet metric;
  std::vector<cxd> normalizer;  // row-major n x n
  bool coordinates_rotated = false;
  bool torsion_free = false;  // metric is a complex Hessian of a potential
  std::vector<std::string> scalar_names;
  std::vector<TaylorJet> scalars;  // real-valued, order 4
};

// {flat, conformal-exp, kahler-potential, perturbed-hermitian, product}
std::vector<std::string> catalog_entries();

// base_point holds 2n reals (x_1..x_n, y_1..y_n); the complex base is
// p_i = x_i + i y_i. Throws UnknownEntry / ConfigError.
CatalogResult catalog(const std::string& entry, const std::vector<double>& base_point);

// Randomized sweep: `points` base points per entry, all catalog scalars,
// residuals aggregated per entry. Structural residuals (torsion
// antisymmetry, curvature conjugate symmetry, torsion of potential-built
// metrics) are tracked alongside the commutation residuals.
struct EntryIdentityReport {
  std::string entry;
  bool torsion_free = false;
  double third = 0, fourth_mixed = 0, fourth_pairs = 0;
  double third_rel = 0, fourth_mixed_rel = 0, fourth_pairs_rel = 0;
  double torsion_antisym = 0;   // max |T^k_{ij} + T^k_{ji}|
  double curvature_conj = 0;    // max |R_{i jb k lb} - conj(R_{j ib l kb})|
  double torsion_max = 0;       // max |T^k_{ij}|
};

struct IdentitySuiteResult {
  int n = 0;
  int points = 0;
  std::uint64_t seed = 0;
  std::vector<EntryIdentityReport> entries;
  double worst_abs = 0;  // max residual over entries and identities
  double worst_rel = 0;  // same, divided by max(1, scale)
};

IdentitySuiteResult identity_suite(int n, int points, std::uint64_t seed);

}  // namespace jeq
