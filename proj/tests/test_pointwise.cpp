#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "jeq/pointwise.hpp"
#include "jeq/rng.hpp"
#include "oracles.hpp"

using namespace jeq;

TEST_CASE("hermitian matrix container") {
  HermitianMatrix m(2);
  m.set(0, 1, cxd(1.0, -2.0));
  CHECK(m(1, 0) == cxd(1.0, 2.0));
  m.set(0, 0, cxd(3.0, 0.5));  // imaginary part of a diagonal entry drops
  CHECK(m(0, 0) == cxd(3.0, 0.0));

  HermitianMatrix id = HermitianMatrix::identity(3);
  CHECK(id(2, 2) == cxd(1, 0));
  CHECK(id(0, 1) == cxd(0, 0));

  const double d[2] = {4.0, 9.0};
  HermitianMatrix dg = HermitianMatrix::diagonal(d);
  CHECK(dg(1, 1) == cxd(9, 0));

  // from_data symmetrizes: average with the conjugate transpose
  cxd raw[4] = {cxd(1, 1), cxd(2, 0), cxd(0, 0), cxd(5, -3)};
  HermitianMatrix s = HermitianMatrix::from_data(2, raw);
  CHECK(s(0, 0) == cxd(1, 0));
  CHECK(s(0, 1) == cxd(1, 0));
  CHECK(s(1, 0) == cxd(1, 0));
  CHECK(s(1, 1) == cxd(5, 0));
}

TEST_CASE("relative spectrum on hand-checkable pairs") {
  // diagonal pair: eigenvalues a_i / g_i, sorted descending
  const double av[2] = {2.0, 8.0};
  const double gv[2] = {1.0, 4.0};
  RelativeSpectrum s = relative_spectrum(HermitianMatrix::diagonal(av),
                                         HermitianMatrix::diagonal(gv));
  REQUIRE(s.dim() == 2);
  CHECK(s.values[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.values[1] == doctest::Approx(2.0).epsilon(1e-14));

  // 2x2 with known roots: [[2,1],[1,2]] vs I -> {3, 1}
  HermitianMatrix a(2);
  a.set(0, 0, 2.0);
  a.set(1, 1, 2.0);
  a.set(0, 1, 1.0);
  s = relative_spectrum(a, HermitianMatrix::identity(2));
  CHECK(s.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-14));

  // A = 2 g gives a double eigenvalue 2 for any positive g
  rng r(11);
  HermitianMatrix g = oracle::random_pd(3, r);
  HermitianMatrix a2 = g;
  a2 *= 2.0;
  s = relative_spectrum(a2, g);
  for (double v : s.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));

  // non-positive g is rejected
  HermitianMatrix bad = HermitianMatrix::identity(2);
  bad.set(1, 1, -1.0);
  CHECK(oracle::error_name([&] { relative_spectrum(a, bad); }) == "NonPositiveMetric");
}

TEST_CASE("relative spectrum agrees with the inertia-bisection oracle") {
  rng r(2026);
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    for (int trial = 0; trial < 500; ++trial) {
      HermitianMatrix a = oracle::random_hermitian(n, r, r.log_uniform(0.1, 10.0));
      HermitianMatrix g = oracle::random_pd(n, r, r.log_uniform(0.05, 1.0));
      RelativeSpectrum prod = relative_spectrum(a, g);
      std::vector<double> ref = oracle::relative_eigs(a, g);
      for (int i = 0; i < n; ++i) {
        double scale = std::max(1.0, std::abs(ref[std::size_t(i)]));
        worst = std::max(worst,
                         std::abs(prod.values[std::size_t(i)] - ref[std::size_t(i)]) / scale);
      }
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("j operator, trace identity, and linearized coefficients") {
  rng r(5);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + trial % 3;
    HermitianMatrix gfrak = oracle::random_pd(n, r, 0.3);
    HermitianMatrix g = oracle::random_pd(n, r, 0.3);

    // tr(gfrak^{-1} g) equals the sum of reciprocals of the relative
    // eigenvalues of (gfrak, g)
    double tr = j_operator(gfrak, g);
    RelativeSpectrum s = relative_spectrum(gfrak, g);
    double sum = 0.0;
    for (double v : s.values) sum += 1.0 / v;
    CHECK(tr == doctest::Approx(sum).epsilon(1e-11));

    // d/dt tr((gfrak + tH)^{-1} g)|_0 = -tr(F H) with F = gfrak^{-1} g gfrak^{-1}
    HermitianMatrix h = oracle::random_hermitian(n, r, 0.5);
    HermitianMatrix f = linearized_coefficients(gfrak, g);
    double dot = 0.0;  // Re tr(F H), both Hermitian
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dot += (f(i, j) * h(j, i)).real();
    const double t = 1e-6;
    HermitianMatrix gp = gfrak + t * h;
    HermitianMatrix gm = gfrak + (-t) * h;
    double fd = (j_operator(gp, g) - j_operator(gm, g)) / (2 * t);
    CHECK(fd == doctest::Approx(-dot).epsilon(2e-5));
  }

  HermitianMatrix notpd = HermitianMatrix::identity(2);
  notpd.set(0, 0, -0.5);
  CHECK(oracle::error_name([&] {
          j_operator(notpd, HermitianMatrix::identity(2));
        }) == "PositivityLost");
}

TEST_CASE("subsolution implies cone; the separating example splits them") {
  // lambda = (0.9, 0.9), psi = 1: sum 1/lambda = 2.22 > 2 = n/psi, so the
  // subsolution inequality fails, but each deleted sum 1.11 < 2 passes the
  // cone condition strictly.
  RelativeSpectrum s;
  s.values = {0.9, 0.9};
  CHECK_FALSE(subsolution_check(s, 1.0));
  CHECK(cone_check(s, 1.0));
  CHECK(subsolution_margin(s, 1.0) == doctest::Approx(2.0 - 2.0 / 0.9).epsilon(1e-14));
  CHECK(cone_margin(s, 1.0) == doctest::Approx(2.0 - 1.0 / 0.9).epsilon(1e-14));

  // randomized implication, including boundary-tight draws
  rng r(77);
  int hits = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    int n = 2 + trial % 3;
    RelativeSpectrum sp;
    sp.values.resize(std::size_t(n));
    double sum = 0.0;
    for (double& v : sp.values) {
      v = r.log_uniform(0.05, 20.0);
      sum += 1.0 / v;
    }
    // half the draws satisfy the subsolution inequality by construction
    double psi = (trial % 2 == 0) ? n / sum * r.uniform(0.5, 1.0)
                                  : n / sum * r.uniform(1.0, 2.0);
    if (subsolution_check(sp, psi)) {
      ++hits;
      CHECK(cone_check(sp, psi));
    }
  }
  CHECK(hits > 500);  // the implication was actually exercised

  // non-strict boundary: equality passes the subsolution check
  RelativeSpectrum eq;
  eq.values = {1.0, 1.0};
  CHECK(subsolution_check(eq, 1.0));  // sum = 2 = n/psi exactly
  CHECK(cone_check(eq, 1.0));         // deleted sums are 1 < 2, strict

  // admissibility floor
  RelativeSpectrum tiny;
  tiny.values = {1.0, 5e-15};
  CHECK(oracle::error_name([&] { subsolution_check(tiny, 1.0); }) == "NonAdmissible");
}

TEST_CASE("quantitative threshold: construction and certification") {
  ConeThreshold thr = lemma_threshold(0.5, 0.8, 1.6, 2);
  CHECK(thr.theta == doctest::Approx(0.5 * 0.8 / 2).epsilon(1e-15));
  CHECK(thr.bigN >= 2.0);
  CHECK(thr.delta > 0);
  CHECK(thr.delta < 2);
  CHECK(thr.epsilon == 0.5);

  // invalid inputs
  CHECK(oracle::error_name([&] { lemma_threshold(0.0, 1, 1, 2); }) == "ConfigError");
  CHECK(oracle::error_name([&] { lemma_threshold(1.5, 1, 1, 2); }) == "ConfigError");
  CHECK(oracle::error_name([&] { lemma_threshold(0.5, 2, 1, 2); }) == "ConfigError");

  // randomized search at desk scale: no violations of the certified bound
  LemmaSearchResult res = lemma_search(thr, 20000, 9);
  CHECK(res.violations == 0);
  CHECK(res.samples >= 20000);
  CHECK(res.worst_margin >= 0.0);

  // hypothesis checking rejects states off the equation manifold
  std::vector<double> gf = {10.0, 10.0};
  std::vector<double> c = {1.0, 1.0};
  CHECK(oracle::error_name([&] {
          lemma_margin(gf, c, 1.0, thr);  // sum 1/gfrak = 0.2 != n/psi = 2
        }) == "HypothesisViolation");

  // a valid sample on the manifold: psi = 1, gfrak = (N, t) with
  // 1/N + 1/t = 2 => t = N/(2N - 1); c at the feasible lower corner
  double bigN = thr.bigN;
  double t = bigN / (2 * bigN - 1.0);
  std::vector<double> gfrak = {bigN, t};
  std::vector<double> corner = {std::max(thr.epsilon, 1.0), std::max(thr.epsilon, 1.0)};
  double margin = lemma_margin(gfrak, corner, 1.0, thr);
  CHECK(margin >= 0.0);
  CHECK(lemma_verify(gfrak, corner, 1.0, thr));

  // the one-parameter corner family stays certified across (psi, W)
  for (double psi : {0.8, 1.0, 1.3, 1.6}) {
    if (psi > 1.0 / thr.epsilon) continue;
    for (double mult : {1.0, 2.0, 8.0})
      CHECK(corner_family_margin(thr, psi, thr.bigN * mult) >= 0.0);
  }

  // trace too small to meet the equation constraint
  CHECK(oracle::error_name([&] { corner_family_margin(thr, 1.0, 1.5); }) ==
        "HypothesisViolation");
}
