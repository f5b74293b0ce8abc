#include "jeq/pointwise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jeq/rng.hpp"
#include "jeq/smallherm.hpp"

namespace jeq {

namespace {

void require_dim(int n) {
  if (n < 1 || n > smallherm::kMaxDim)
    fail(errc::config_error, "matrix dimension " + std::to_string(n) +
                                 " outside [1, " + std::to_string(smallherm::kMaxDim) + "]");
}

void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) fail(errc::config_error, "dimension mismatch");
  require_dim(a.dim());
}

constexpr double kAdmissibleFloor = 1e-14;

void require_admissible(const RelativeSpectrum& s) {
  for (double v : s.values)
    if (!(v > kAdmissibleFloor))
      fail(errc::non_admissible, "relative eigenvalue " + std::to_string(v) +
                                     " below admissibility floor");
}

void require_psi(double psi) {
  if (!(psi > 0.0)) fail(errc::config_error, "psi must be positive");
}

}  // namespace

HermitianMatrix HermitianMatrix::identity(int n) {
  require_dim(n);
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) m.a_[std::size_t(i) * n + i] = cxd(1.0, 0.0);
  return m;
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> d) {
  const int n = int(d.size());
  require_dim(n);
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) m.a_[std::size_t(i) * n + i] = cxd(d[i], 0.0);
  return m;
}

HermitianMatrix HermitianMatrix::from_data(int n, const cxd* data) {
  require_dim(n);
  HermitianMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.a_[std::size_t(i) * n + i] = cxd(data[i * n + i].real(), 0.0);
    for (int j = i + 1; j < n; ++j) {
      const cxd v = 0.5 * (data[i * n + j] + std::conj(data[j * n + i]));
      m.a_[std::size_t(i) * n + j] = v;
      m.a_[std::size_t(j) * n + i] = std::conj(v);
    }
  }
  return m;
}

void HermitianMatrix::set(int i, int j, cxd v) {
  if (i == j) {
    a_[std::size_t(i) * n_ + i] = cxd(v.real(), 0.0);
  } else {
    a_[std::size_t(i) * n_ + j] = v;
    a_[std::size_t(j) * n_ + i] = std::conj(v);
  }
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  require_same_dim(*this, o);
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

RelativeSpectrum relative_spectrum(const HermitianMatrix& A, const HermitianMatrix& g) {
  require_same_dim(A, g);
  const int n = A.dim();
  double w[smallherm::kMaxDim];
  if (!smallherm::relative_eigvals(n, A.data(), g.data(), w))
    fail(errc::non_positive_metric, "reference metric is not positive definite");
  RelativeSpectrum s;
  s.values.assign(w, w + n);
  std::reverse(s.values.begin(), s.values.end());
  return s;
}

double j_operator(const HermitianMatrix& gfrak, const HermitianMatrix& g) {
  require_same_dim(gfrak, g);
  const int n = gfrak.dim();
  cxd L[smallherm::kMaxDim * smallherm::kMaxDim];
  for (int i = 0; i < n * n; ++i) L[i] = gfrak.data()[i];
  if (!smallherm::cholesky(n, L))
    fail(errc::positivity_lost, "gfrak is not positive definite");
  return smallherm::trace_inv_times(n, L, g.data());
}

HermitianMatrix linearized_coefficients(const HermitianMatrix& gfrak,
                                        const HermitianMatrix& g) {
  require_same_dim(gfrak, g);
  const int n = gfrak.dim();
  cxd L[smallherm::kMaxDim * smallherm::kMaxDim];
  for (int i = 0; i < n * n; ++i) L[i] = gfrak.data()[i];
  if (!smallherm::cholesky(n, L))
    fail(errc::positivity_lost, "gfrak is not positive definite");
  cxd inv[smallherm::kMaxDim * smallherm::kMaxDim];
  cxd tmp[smallherm::kMaxDim * smallherm::kMaxDim];
  cxd f[smallherm::kMaxDim * smallherm::kMaxDim];
  smallherm::inverse_from_chol(n, L, inv);
  smallherm::matmul(n, inv, g.data(), tmp);
  smallherm::matmul(n, tmp, inv, f);
  return HermitianMatrix::from_data(n, f);
}

double positivity_margin(const HermitianMatrix& A, const HermitianMatrix& g) {
  require_same_dim(A, g);
  double w[smallherm::kMaxDim];
  if (!smallherm::relative_eigvals(A.dim(), A.data(), g.data(), w))
    fail(errc::non_positive_metric, "reference metric is not positive definite");
  return w[0];
}

bool subsolution_check(const RelativeSpectrum& s, double psi) {
  require_psi(psi);
  require_admissible(s);
  double sum = 0.0;
  for (double v : s.values) sum += 1.0 / v;
  return sum <= double(s.dim()) / psi;
}

double subsolution_margin(const RelativeSpectrum& s, double psi) {
  require_psi(psi);
  require_admissible(s);
  double sum = 0.0;
  for (double v : s.values) sum += 1.0 / v;
  return double(s.dim()) / psi - sum;
}

bool cone_check(const RelativeSpectrum& s, double psi) {
  require_psi(psi);
  require_admissible(s);
  const int n = s.dim();
  const double rhs = double(n) / psi;
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (i != k) sum += 1.0 / s.values[i];
    if (!(sum < rhs)) return false;
  }
  return true;
}

double cone_margin(const RelativeSpectrum& s, double psi) {
  require_psi(psi);
  require_admissible(s);
  const int n = s.dim();
  const double rhs = double(n) / psi;
  double m = rhs;  // k-loop result for n = 1 (empty sum)
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      if (i != k) sum += 1.0 / s.values[i];
    m = std::min(m, rhs - sum);
  }
  return m;
}

ConeThreshold lemma_threshold(double epsilon, double psi_min, double psi_max, int n) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(errc::config_error, "epsilon outside (0, 1]");
  if (!(psi_min > 0.0 && psi_min <= psi_max))
    fail(errc::config_error, "need 0 < psi_min <= psi_max");
  if (n < 1) fail(errc::config_error, "n must be >= 1");
  ConeThreshold thr;
  thr.epsilon = epsilon;
  thr.psi_min = psi_min;
  thr.psi_max = psi_max;
  thr.n = n;
  thr.theta = 0.5 * epsilon * psi_min;
  // Worst psi for (n-d)^2 (1 + eps*psi/n)/(n*psi) >= (n+theta)/psi is
  // psi_min, so bracket H(d) = (n-d)^2 (1 + eps*psi_min/n)/n - (n + theta).
  const double nn = double(n);
  auto H = [&](double d) {
    return (nn - d) * (nn - d) * (1.0 + epsilon * psi_min / nn) / nn - (nn + thr.theta);
  };
  if (!(H(0.0) > 0.0))
    fail(errc::infeasible_threshold, "no delta in (0, n) satisfies the bound");
  double lo = 0.0, hi = nn;  // H(lo) >= 0 invariant, H(n) = -(n+theta) < 0
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (H(mid) >= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  thr.delta = lo;
  thr.bigN = std::max(nn, nn * psi_max / thr.delta);
  return thr;
}

namespace {

void check_hypotheses(std::span<const double> gfrak_diag, std::span<const double> c_diag,
                      double psi, const ConeThreshold& thr) {
  const int n = thr.n;
  if (int(gfrak_diag.size()) != n || int(c_diag.size()) != n)
    fail(errc::config_error, "diagonal length does not match threshold dimension");
  require_psi(psi);
  const double S = double(n) / psi;
  double sum_inv_g = 0.0, W = 0.0, sum_inv_c = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(gfrak_diag[i] > 0.0)) fail(errc::hypothesis_violation, "gfrak diagonal not positive");
    sum_inv_g += 1.0 / gfrak_diag[i];
    W += gfrak_diag[i];
  }
  const double eps = thr.epsilon;
  const double band = 1e-12 / eps;
  for (int i = 0; i < n; ++i) {
    if (!(c_diag[i] >= eps - band && c_diag[i] <= 1.0 / eps + band))
      fail(errc::hypothesis_violation,
           "chi_plus_usub entry " + std::to_string(c_diag[i]) + " outside [eps, 1/eps]");
    sum_inv_c += 1.0 / c_diag[i];
  }
  if (std::abs(sum_inv_g - S) > 1e-9 * S)
    fail(errc::hypothesis_violation, "equation constraint sum 1/gfrak_i = n/psi fails");
  if (!(W >= thr.bigN * (1.0 - 1e-12)))
    fail(errc::hypothesis_violation, "W below bigN");
  if (!(sum_inv_c <= S * (1.0 + 1e-9)))
    fail(errc::hypothesis_violation, "subsolution inequality sum 1/c_i <= n/psi fails");
}

}  // namespace

double lemma_margin(std::span<const double> gfrak_diag, std::span<const double> c_diag,
                    double psi, const ConeThreshold& thr) {
  check_hypotheses(gfrak_diag, c_diag, psi, thr);
  double lhs = 0.0;
  for (int i = 0; i < thr.n; ++i) {
    const double x = 1.0 / gfrak_diag[i];
    lhs += x * x * c_diag[i];
  }
  return lhs - (double(thr.n) + thr.theta) / psi;
}

bool lemma_verify(std::span<const double> gfrak_diag, std::span<const double> c_diag,
                  double psi, const ConeThreshold& thr) {
  return lemma_margin(gfrak_diag, c_diag, psi, thr) >= 0.0;
}

namespace {

// Worst-case diagonal c for fixed weights w_i = (1/gfrak_i)^2: minimizes
// sum w_i c_i over { eps <= c_i <= 1/eps, sum 1/c_i <= S }. The objective is
// increasing in every c_i, so the minimum is all-eps when feasible and
// otherwise sits on the constraint surface, where KKT gives
// c_i = clamp(sqrt(mu / w_i), eps, 1/eps) with mu fixed by sum 1/c_i = S.
void worst_c(const double* w, int n, double eps, double S, double* c) {
  double all_eps = double(n) / eps;
  if (all_eps <= S) {
    for (int i = 0; i < n; ++i) c[i] = eps;
    return;
  }
  double wmin = w[0], wmax = w[0];
  for (int i = 1; i < n; ++i) {
    wmin = std::min(wmin, w[i]);
    wmax = std::max(wmax, w[i]);
  }
  double mu_lo = eps * eps * wmin;        // all entries clamp at eps
  double mu_hi = wmax / (eps * eps);      // all entries clamp at 1/eps
  auto eval = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ci = std::clamp(std::sqrt(mu / w[i]), eps, 1.0 / eps);
      s += 1.0 / ci;
    }
    return s;
  };
  for (int it = 0; it < 300; ++it) {
    const double mu = 0.5 * (mu_lo + mu_hi);
    if (eval(mu) > S)
      mu_lo = mu;
    else
      mu_hi = mu;
  }
  const double mu = mu_hi;  // sum 1/c_i <= S side
  for (int i = 0; i < n; ++i) c[i] = std::clamp(std::sqrt(mu / w[i]), eps, 1.0 / eps);
}

}  // namespace

LemmaSearchResult lemma_search(const ConeThreshold& thr, long samples, std::uint64_t seed) {
  LemmaSearchResult res;
  res.thr = thr;
  res.worst_margin = std::numeric_limits<double>::infinity();
  const int n = thr.n;
  const double eps = thr.epsilon;
  const double psi_hi = std::min(thr.psi_max, 1.0 / eps);
  if (psi_hi < thr.psi_min) return res;  // hypothesis set empty on this range
  rng r(seed);
  std::vector<double> x(n), gf(n), y(n), c(n), w(n), cw(n);
  auto record = [&](double margin, const std::vector<double>& gfrak,
                    const std::vector<double>& cd, double psi) {
    if (margin < res.worst_margin) {
      res.worst_margin = margin;
      res.worst_gfrak = gfrak;
      res.worst_c = cd;
      res.worst_psi = psi;
    }
    if (margin < 0.0) ++res.violations;
  };
  for (long s = 0; s < samples; ++s) {
    const double psi = r.uniform(thr.psi_min, psi_hi);
    const double S = double(n) / psi;
    // gfrak reciprocals x_i: x_0 pinned small so W = sum 1/x_i >= bigN.
    double W = 0.0;
    int guard = 0;
    do {
      x[0] = 1.0 / r.log_uniform(thr.bigN / n, 100.0 * thr.bigN);
      double budget = S - x[0];
      if (n == 1) {
        x[0] = S;
      } else if (n == 2) {
        x[1] = budget;
      } else {
        // uniform simplex split of the remaining budget
        double acc = 0.0;
        for (int i = 1; i < n; ++i) {
          y[i] = -std::log(1.0 - r.uniform01());
          acc += y[i];
        }
        for (int i = 1; i < n; ++i) x[i] = budget * y[i] / acc;
      }
      W = 0.0;
      for (int i = 0; i < n; ++i) W += 1.0 / x[i];
    } while (W < thr.bigN && ++guard < 64);
    if (W < thr.bigN) continue;
    for (int i = 0; i < n; ++i) {
      gf[i] = 1.0 / x[i];
      w[i] = x[i] * x[i];
    }
    // c uniform in the box, rescaled onto the constraint surface when the
    // draw lands outside it (and half the time regardless, to stress the
    // binding side).
    double ysum = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] = r.uniform(eps, 1.0 / eps);
      ysum += y[i];
    }
    const bool force_boundary = (r.next_u64() & 1u) != 0;
    if (ysum > S || force_boundary) {
      const double base = double(n) * eps;
      const double alpha = (ysum > base) ? (S - base) / (ysum - base) : 0.0;
      // stretching toward the surface (alpha > 1) must not leave the box;
      // capped entries keep sum 1/c_i <= S, just no longer with equality
      for (int i = 0; i < n; ++i)
        y[i] = std::min(eps + (y[i] - eps) * std::max(0.0, alpha), 1.0 / eps);
    }
    for (int i = 0; i < n; ++i) c[i] = 1.0 / y[i];
    record(lemma_margin(gf, c, psi, thr), gf, c, psi);
    ++res.samples;
    // KKT-worst c for this gfrak
    worst_c(w.data(), n, eps, S, cw.data());
    record(lemma_margin(gf, cw, psi, thr), gf, cw, psi);
    ++res.samples;
  }
  return res;
}

double corner_family_margin(const ConeThreshold& thr, double psi, double W) {
  const int n = thr.n;
  require_psi(psi);
  const double nn = double(n);
  if (!(W >= nn * psi))
    fail(errc::hypothesis_violation, "no diagonal with trace W satisfies the equation");
  // f(t) = 1/(W - (n-1)t) + (n-1)/t is decreasing on (0, W/n]; bisect
  // f(t) = n/psi there so the first entry W - (n-1)t is the largest.
  const double target = nn / psi;
  auto f = [&](double t) { return 1.0 / (W - (nn - 1.0) * t) + (nn - 1.0) / t; };
  double lo = std::min(W / nn, (nn - 1.0) * psi / nn) * 0.5;
  double hi = W / nn;
  if (n == 1) {
    lo = hi = W / nn;  // single entry, equation forces W = psi exactly
  } else {
    while (f(lo) < target) lo *= 0.5;  // ensure f(lo) >= target
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (f(mid) >= target)
        lo = mid;
      else
        hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  std::vector<double> gf(n, t), c(n, std::max(thr.epsilon, psi));
  gf[0] = W - (nn - 1.0) * t;
  return lemma_margin(gf, c, psi, thr);
}

}  // namespace jeq
