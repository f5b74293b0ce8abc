#pragma once

// Truncated multivariate power series ("jets") in the 2n formal variables
// (w_1..w_n, wbar_1..wbar_n) about a base point, total order <= 4, complex
// coefficients. Coefficients at degree d computed by these routines are
// exactly the degree-d Taylor coefficients of the represented function, so
// derivative values extracted at the base point carry no truncation error;
// each jet tracks the order up to which its coefficients are trustworthy.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "jeq/error.hpp"

namespace jeq {

using cxd = std::complex<double>;

constexpr int kJetOrder = 4;
constexpr int kJetMaxVars = 6;  // complex dimension cap for jets

class JetLayout {
 public:
  static const JetLayout& get(int n);

  int n = 0;       // complex dimension; 2n formal variables
  int ncoef = 0;   // number of multi-indices with total degree <= 4

  std::vector<std::array<std::uint8_t, 2 * kJetMaxVars>> expo;
  std::vector<int> deg;
  std::array<int, kJetOrder + 2> deg_begin{};  // ranks [deg_begin[d], deg_begin[d+1]) have degree d
  std::vector<std::int32_t> prod;              // rank of exponent sum, -1 when degree > 4
  std::vector<std::int32_t> conj_perm;
  std::vector<std::int32_t> dz_dst, dzb_dst;   // [v * ncoef + r], -1 when exponent zero
  std::vector<double> dz_fac, dzb_fac;

  int rank_of(std::span<const std::uint8_t> e) const;

 private:
  explicit JetLayout(int n);
};

class TaylorJet {
 public:
  TaylorJet() = default;
  explicit TaylorJet(int n, int order = kJetOrder);

  static TaylorJet constant(int n, cxd v);
  // base + w_v (the holomorphic coordinate z_v expanded about base)
  static TaylorJet variable(int n, int v, cxd base);
  // conj(base) + wbar_v
  static TaylorJet conj_variable(int n, int v, cxd base);

  int nvars() const { return lay_ ? lay_->n : 0; }
  int order() const { return order_; }
  bool valid() const { return lay_ != nullptr && order_ >= 0; }

  cxd value() const;
  cxd coeff(std::span<const std::uint8_t> e) const;
  void set_coeff(std::span<const std::uint8_t> e, cxd v);
  std::span<const cxd> coeffs() const { return c_; }

  TaylorJet& operator+=(const TaylorJet& o);
  TaylorJet& operator-=(const TaylorJet& o);
  TaylorJet& operator*=(cxd s);
  friend TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
  friend TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
  friend TaylorJet operator*(cxd s, TaylorJet a) { return a *= s; }
  friend TaylorJet operator*(const TaylorJet& a, const TaylorJet& b);

  TaylorJet dz(int v) const;   // d/dw_v
  TaylorJet dzb(int v) const;  // d/dwbar_v
  TaylorJet conjugate() const;
  bool is_real(double tol = 0.0) const;  // conjugate-symmetric coefficients

  static TaylorJet reciprocal(const TaylorJet& f);  // requires f(0) != 0
  static TaylorJet exp(const TaylorJet& f);
  static TaylorJet sin(const TaylorJet& f);
  static TaylorJet cos(const TaylorJet& f);

  double max_abs_coeff() const;

 private:
  // sum_k a_k u^k for u with zero constant term (exact at the truncation
  // order, so the order tag is preserved)
  static TaylorJet series_(const TaylorJet& u, std::span<const double> a, int order);

 public:

 private:
  const JetLayout* lay_ = nullptr;
  int order_ = -1;
  std::vector<cxd> c_;

  friend TaylorJet mul_impl(const TaylorJet& a, const TaylorJet& b);
};

}  // namespace jeq
