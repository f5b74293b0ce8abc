#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "jeq/chern.hpp"
#include "oracles.hpp"

using namespace jeq;

namespace {

MetricJet flat_metric(int n) {
  std::vector<TaylorJet> e;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      e.push_back(TaylorJet::constant(n, i == j ? cxd(1, 0) : cxd(0, 0)));
  return make_metric_jet(n, std::move(e));
}

// a generic order-4 real scalar with nonzero mixed derivatives
TaylorJet sample_scalar(int n, const std::vector<double>& base) {
  TaylorJet f = TaylorJet::constant(n, cxd(0, 0));
  for (int i = 0; i < n; ++i) {
    cxd p(base[std::size_t(i)], base[std::size_t(n + i)]);
    TaylorJet z = TaylorJet::variable(n, i, p);
    TaylorJet zb = TaylorJet::conj_variable(n, i, p);
    f += z * zb + 0.3 * TaylorJet::sin(z + zb) +
         0.1 * (z * z * zb + zb * zb * z);
  }
  return f;
}

}  // namespace

TEST_CASE("flat metric: connection, torsion, curvature vanish exactly") {
  for (int n : {2, 3}) {
    ConnectionData cd = connection(flat_metric(n));
    for (cxd v : cd.Gamma) CHECK(v == cxd(0, 0));
    for (cxd v : cd.T) CHECK(v == cxd(0, 0));
    for (cxd v : cd.R) CHECK(v == cxd(0, 0));
  }
}

TEST_CASE("flat metric: covariant derivatives reduce to plain jet derivatives") {
  const int n = 2;
  const std::vector<double> base = {0.2, -0.4, 0.1, 0.5};
  TaylorJet v = sample_scalar(n, base);
  CovariantDerivatives cds = covariant_derivatives(v, flat_metric(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(cds.v2(i, j) - v.dz(i).dzb(j).value()) < 1e-15);
      for (int k = 0; k < n; ++k) {
        CHECK(std::abs(cds.v3(i, j, k) - v.dz(i).dzb(j).dz(k).value()) < 1e-15);
        CHECK(std::abs(cds.v3b(i, j, k) - v.dz(i).dzb(j).dzb(k).value()) < 1e-15);
        for (int l = 0; l < n; ++l) {
          cxd plain = v.dz(i).dzb(j).dz(k).dzb(l).value();
          CHECK(std::abs(cds.v4(i, j, k, l) - plain) < 1e-15);
          CHECK(std::abs(cds.v4r(i, j, k, l) - plain) < 1e-15);
        }
      }
    }

  // and the commutation residuals vanish to rounding
  CommutationResiduals res = commutation_residuals(v, flat_metric(n));
  CHECK(res.third < 1e-15);
  CHECK(res.fourth_mixed < 1e-14);
  CHECK(res.fourth_pairs < 1e-14);
}

TEST_CASE("catalog structure and normalization") {
  std::vector<std::string> entries = catalog_entries();
  CHECK(entries.size() == 5);

  const std::vector<double> base = {0.15, -0.3, 0.45, 0.05, 0.2, -0.1};
  for (const std::string& name : entries) {
    CAPTURE(name);
    for (int n : {2, 3}) {
      std::vector<double> bp(base.begin(), base.begin() + 2 * n);
      CatalogResult cat = catalog(name, bp);
      CHECK(cat.entry == name);
      CHECK(cat.metric.n == n);
      CHECK(int(cat.scalars.size()) >= 5);
      CHECK(cat.scalar_names.size() == cat.scalars.size());

      // normalized: metric at the base point is the identity
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cxd want = (i == j) ? cxd(1, 0) : cxd(0, 0);
          CHECK(std::abs(cat.metric.at(i, j).value() - want) < 1e-12);
        }

      // scalars are real-valued germs of order 4
      for (const TaylorJet& s : cat.scalars) {
        CHECK(s.order() == 4);
        CHECK(s.is_real(1e-12));
      }

      ConnectionData cd = connection(cat.metric);

      // torsion antisymmetry T^k_{ij} = -T^k_{ji} holds exactly: both sides
      // are computed from the same Gamma entries
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            CHECK(cd.torsion(i, j, k) == -cd.torsion(j, i, k));

      // curvature conjugate symmetry R_{i jb k lb} = conj(R_{j ib l kb})
      double conj_res = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
              conj_res = std::max(conj_res, std::abs(cd.curv(i, j, k, l) -
                                                     std::conj(cd.curv(j, i, l, k))));
      CHECK(conj_res < 1e-13);

      // potential-built metrics are torsion-free
      if (cat.torsion_free) {
        double tmax = 0;
        for (cxd t : cd.T) tmax = std::max(tmax, std::abs(t));
        CHECK(tmax < 1e-13);
      }
    }
  }

  CHECK(oracle::error_name([&] { catalog("no-such-entry", {0, 0, 0, 0}); }) ==
        "UnknownEntry");
  CHECK(oracle::error_name([&] { catalog("flat", {0, 0, 0}); }) == "ConfigError");
}

TEST_CASE("metric jet validation") {
  const int n = 2;
  // non-conjugate-symmetric entries
  std::vector<TaylorJet> bad;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      bad.push_back(TaylorJet::constant(n, i == j ? cxd(1, 0) : cxd(0.5, 0.25)));
  CHECK(oracle::error_name([&] { make_metric_jet(n, bad); }) == "ConfigError");

  // non-positive base value
  std::vector<TaylorJet> neg;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      neg.push_back(TaylorJet::constant(n, i == j ? cxd(i == 0 ? -1.0 : 1.0, 0)
                                                  : cxd(0, 0)));
  CHECK(oracle::error_name([&] { make_metric_jet(n, neg); }) == "NonPositiveMetric");

  // insufficient jet order for the fourth-order identities
  MetricJet flat = flat_metric(n);
  TaylorJet low = sample_scalar(n, {0.1, 0.1, 0.1, 0.1}).dz(0).dzb(0);  // order 2
  CHECK(oracle::error_name([&] { covariant_derivatives(low, flat); }) ==
        "InsufficientOrder");
}

TEST_CASE("identity suite aggregates all entries below 1e-12") {
  for (int n : {2, 3}) {
    IdentitySuiteResult r = identity_suite(n, 25, 20260816);
    CHECK(r.n == n);
    CHECK(r.points == 25);
    CHECK(r.entries.size() == 5);
    CHECK(r.worst_abs < 1e-12);
    CHECK(r.worst_rel < 1e-12);
    for (const EntryIdentityReport& e : r.entries) {
      CAPTURE(e.entry);
      CHECK(e.torsion_antisym == 0.0);  // exact by construction
      CHECK(e.curvature_conj < 1e-13);
      if (e.torsion_free) CHECK(e.torsion_max < 1e-13);
      if (e.entry == "perturbed-hermitian") CHECK(e.torsion_max > 1e-6);
    }
  }

  // determinism: the same seed reproduces the same residuals
  IdentitySuiteResult a = identity_suite(2, 10, 7);
  IdentitySuiteResult b = identity_suite(2, 10, 7);
  CHECK(a.worst_abs == b.worst_abs);
  CHECK(a.worst_rel == b.worst_rel);
}
