#pragma once

// Pointwise algebra of the equation tr(gfrak^{-1} g) = n/psi with
// gfrak = chi + dd^c u: relative spectra, the linearized coefficient matrix
// F = gfrak^{-1} g gfrak^{-1}, subsolution and cone inequalities, and the
// quantitative threshold (theta, N) certifying
//   F^{ij} (chi + usub)_{ij} >= (n + theta)/psi  whenever  W >= N.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "jeq/error.hpp"

namespace jeq {

using cxd = std::complex<double>;

class HermitianMatrix {
 public:
  HermitianMatrix() : n_(0) {}
  explicit HermitianMatrix(int n) : n_(n), a_(std::size_t(n) * n, cxd(0, 0)) {}

  static HermitianMatrix identity(int n);
  static HermitianMatrix diagonal(std::span<const double> d);
  // Builds from arbitrary row-major data, enforcing Hermitian symmetry by
  // averaging with the conjugate transpose.
  static HermitianMatrix from_data(int n, const cxd* data);

  int dim() const { return n_; }
  cxd operator()(int i, int j) const { return a_[std::size_t(i) * n_ + j]; }
  // Sets entry (i,j) and its mirror (j,i); diagonal imaginary parts dropped.
  void set(int i, int j, cxd v);

  const cxd* data() const { return a_.data(); }
  cxd* data() { return a_.data(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) {
    return a += b;
  }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

 private:
  int n_;
  std::vector<cxd> a_;
};

// Eigenvalues of det(A - lambda g) = 0, sorted descending; ties keep the
// ascending solver's order reversed, i.e. descending then original index.
struct RelativeSpectrum {
  std::vector<double> values;
  int dim() const { return int(values.size()); }
};

// relative_spectrum(A, g): errors NonPositiveMetric when g is not PD.
RelativeSpectrum relative_spectrum(const HermitianMatrix& A, const HermitianMatrix& g);

// tr(gfrak^{-1} g); errors PositivityLost when gfrak is not PD.
double j_operator(const HermitianMatrix& gfrak, const HermitianMatrix& g);

// F = gfrak^{-1} g gfrak^{-1}; satisfies
//   d/dt tr((gfrak + tH)^{-1} g) |_{t=0} = -tr(F H).
HermitianMatrix linearized_coefficients(const HermitianMatrix& gfrak,
                                        const HermitianMatrix& g);

// Smallest relative eigenvalue of (A, g).
double positivity_margin(const HermitianMatrix& A, const HermitianMatrix& g);

// sum 1/lambda_i <= n/psi, non-strict, exact floating comparison.
// Errors NonAdmissible when any lambda_i <= 1e-14.
bool subsolution_check(const RelativeSpectrum& s, double psi);
double subsolution_margin(const RelativeSpectrum& s, double psi);  // n/psi - sum

// For every k: sum_{i != k} 1/lambda_i < n/psi, strict.
bool cone_check(const RelativeSpectrum& s, double psi);
double cone_margin(const RelativeSpectrum& s, double psi);  // min over k

struct ConeThreshold {
  double theta = 0.0;
  double bigN = 0.0;
  double epsilon = 0.0;
  double psi_min = 0.0;
  double psi_max = 0.0;
  double delta = 0.0;  // bracketed root parameter behind bigN
  int n = 0;
};

// theta = eps*psi_min/2; delta in (0, n) bracketed so that
// (n-delta)^2 (1 + eps*psi/n) / (n*psi) >= (n+theta)/psi on [psi_min, psi_max];
// bigN = max(n, n*psi_max/delta). Errors InfeasibleThreshold when no delta
// exists, ConfigError on invalid inputs (requires 0 < eps <= 1,
// 0 < psi_min <= psi_max).
ConeThreshold lemma_threshold(double epsilon, double psi_min, double psi_max, int n);

// Hypotheses at a point diagonalized so g = I and gfrak is diagonal:
//   (H1) sum 1/gfrak_i = n/psi           (the equation)
//   (H2) eps <= c_i <= 1/eps             (two-sided subsolution bounds)
//   (H3) sum gfrak_i >= bigN             (W large)
//   (H4) sum 1/c_i <= n/psi              (diagonal subsolution inequality)
// where c = chi_plus_usub_diag. Throws HypothesisViolation when any fails
// (small relative slack for the floating equality in H1).
// Returns sum (1/gfrak_i)^2 c_i - (n+theta)/psi.
double lemma_margin(std::span<const double> gfrak_diag,
                    std::span<const double> chi_plus_usub_diag, double psi,
                    const ConeThreshold& thr);
bool lemma_verify(std::span<const double> gfrak_diag,
                  std::span<const double> chi_plus_usub_diag, double psi,
                  const ConeThreshold& thr);

struct LemmaSearchResult {
  ConeThreshold thr;
  long samples = 0;
  long violations = 0;
  double worst_margin = 0.0;
  std::vector<double> worst_gfrak;
  std::vector<double> worst_c;
  double worst_psi = 0.0;
};

// Randomized driver over the hypothesis set: samples psi in the feasible
// interval [psi_min, min(psi_max, 1/eps)], gfrak diagonals on the equation
// manifold with W >= bigN, and c both uniformly in the constraint polytope
// and at its KKT-worst boundary point for the sampled gfrak.
LemmaSearchResult lemma_search(const ConeThreshold& thr, long samples,
                               std::uint64_t seed);

// Margin of the tight one-parameter corner family
// gfrak = (W - (n-1)t, t, ..., t) with t solving the equation constraint and
// all chi_plus_usub entries at the feasible lower bound max(epsilon, psi).
// Errors HypothesisViolation when (W, psi) admits no such t.
double corner_family_margin(const ConeThreshold& thr, double psi, double W);

}  // namespace jeq
