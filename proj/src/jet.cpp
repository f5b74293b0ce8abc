#include "jeq/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace jeq {

namespace {

std::uint64_t pack_expo(std::span<const std::uint8_t> e, int nv) {
  std::uint64_t k = 0;
  for (int i = 0; i < nv; ++i) k = (k << 4) | e[i];
  return k;
}

}  // namespace

JetLayout::JetLayout(int n_) : n(n_) {
  const int nv = 2 * n;
  // enumerate exponent vectors by total degree, lexicographic within degree
  std::array<std::uint8_t, 2 * kJetMaxVars> e{};
  std::unordered_map<std::uint64_t, std::int32_t> rank;
  for (int d = 0; d <= kJetOrder; ++d) {
    deg_begin[d] = int(expo.size());
    // iterate all vectors with sum d via odometer
    e.fill(0);
    e[nv - 1] = std::uint8_t(d);
    while (true) {
      expo.push_back(e);
      deg.push_back(d);
      // next composition of d into nv parts (colex-style odometer)
      int i = nv - 1;
      while (i > 0 && e[i] == 0) --i;
      if (i == 0) break;
      const int carry = e[i] - 1;
      e[i] = 0;
      e[i - 1] += 1;
      e[nv - 1] = std::uint8_t(carry);
    }
  }
  deg_begin[kJetOrder + 1] = int(expo.size());
  ncoef = int(expo.size());
  rank.reserve(std::size_t(ncoef) * 2);
  for (int r = 0; r < ncoef; ++r) rank[pack_expo({expo[r].data(), size_t(nv)}, nv)] = r;

  prod.assign(std::size_t(ncoef) * ncoef, -1);
  std::array<std::uint8_t, 2 * kJetMaxVars> s{};
  for (int a = 0; a < ncoef; ++a)
    for (int b = 0; b < ncoef; ++b) {
      if (deg[a] + deg[b] > kJetOrder) continue;
      for (int i = 0; i < nv; ++i) s[i] = std::uint8_t(expo[a][i] + expo[b][i]);
      prod[std::size_t(a) * ncoef + b] = rank.at(pack_expo({s.data(), size_t(nv)}, nv));
    }

  conj_perm.resize(ncoef);
  for (int r = 0; r < ncoef; ++r) {
    for (int i = 0; i < n; ++i) {
      s[i] = expo[r][n + i];
      s[n + i] = expo[r][i];
    }
    for (int i = nv; i < 2 * kJetMaxVars; ++i) s[i] = 0;
    conj_perm[r] = rank.at(pack_expo({s.data(), size_t(nv)}, nv));
  }

  dz_dst.assign(std::size_t(n) * ncoef, -1);
  dzb_dst.assign(std::size_t(n) * ncoef, -1);
  dz_fac.assign(std::size_t(n) * ncoef, 0.0);
  dzb_fac.assign(std::size_t(n) * ncoef, 0.0);
  for (int v = 0; v < n; ++v)
    for (int r = 0; r < ncoef; ++r) {
      if (expo[r][v] > 0) {
        s = expo[r];
        s[v] -= 1;
        dz_dst[std::size_t(v) * ncoef + r] = rank.at(pack_expo({s.data(), size_t(nv)}, nv));
        dz_fac[std::size_t(v) * ncoef + r] = double(expo[r][v]);
      }
      if (expo[r][n + v] > 0) {
        s = expo[r];
        s[n + v] -= 1;
        dzb_dst[std::size_t(v) * ncoef + r] = rank.at(pack_expo({s.data(), size_t(nv)}, nv));
        dzb_fac[std::size_t(v) * ncoef + r] = double(expo[r][n + v]);
      }
    }
}

const JetLayout& JetLayout::get(int n) {
  if (n < 1 || n > kJetMaxVars) fail(errc::config_error, "jet dimension outside [1, 6]");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<JetLayout>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto& p = cache[n];
  if (!p) p.reset(new JetLayout(n));
  return *p;
}

int JetLayout::rank_of(std::span<const std::uint8_t> e) const {
  const int nv = 2 * n;
  int total = 0;
  for (int i = 0; i < nv; ++i) total += e[i];
  if (total > kJetOrder) return -1;
  for (int r = deg_begin[total]; r < deg_begin[total + 1]; ++r) {
    bool eq = true;
    for (int i = 0; i < nv && eq; ++i) eq = (expo[r][i] == e[i]);
    if (eq) return r;
  }
  return -1;
}

TaylorJet::TaylorJet(int n, int order)
    : lay_(&JetLayout::get(n)), order_(order), c_(lay_->ncoef, cxd(0, 0)) {}

TaylorJet TaylorJet::constant(int n, cxd v) {
  TaylorJet j(n);
  j.c_[0] = v;
  return j;
}

TaylorJet TaylorJet::variable(int n, int v, cxd base) {
  TaylorJet j(n);
  j.c_[0] = base;
  std::array<std::uint8_t, 2 * kJetMaxVars> e{};
  e[v] = 1;
  j.c_[j.lay_->rank_of({e.data(), size_t(2 * n)})] = cxd(1, 0);
  return j;
}

TaylorJet TaylorJet::conj_variable(int n, int v, cxd base) {
  TaylorJet j(n);
  j.c_[0] = std::conj(base);
  std::array<std::uint8_t, 2 * kJetMaxVars> e{};
  e[n + v] = 1;
  j.c_[j.lay_->rank_of({e.data(), size_t(2 * n)})] = cxd(1, 0);
  return j;
}

cxd TaylorJet::value() const {
  if (!valid()) fail(errc::insufficient_order, "jet order exhausted");
  return c_[0];
}

cxd TaylorJet::coeff(std::span<const std::uint8_t> e) const {
  const int r = lay_->rank_of(e);
  if (r < 0) fail(errc::config_error, "exponent outside jet order");
  return c_[r];
}

void TaylorJet::set_coeff(std::span<const std::uint8_t> e, cxd v) {
  const int r = lay_->rank_of(e);
  if (r < 0) fail(errc::config_error, "exponent outside jet order");
  c_[r] = v;
}

TaylorJet& TaylorJet::operator+=(const TaylorJet& o) {
  if (lay_ != o.lay_) fail(errc::config_error, "jet dimension mismatch");
  order_ = std::min(order_, o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator-=(const TaylorJet& o) {
  if (lay_ != o.lay_) fail(errc::config_error, "jet dimension mismatch");
  order_ = std::min(order_, o.order_);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator*=(cxd s) {
  for (auto& v : c_) v *= s;
  return *this;
}

TaylorJet mul_impl(const TaylorJet& a, const TaylorJet& b) {
  const JetLayout& L = *a.lay_;
  TaylorJet r(L.n);
  r.order_ = std::min({kJetOrder, a.order_, b.order_});
  const int cap = r.order_;
  if (cap < 0) return r;
  const std::int32_t* prod = L.prod.data();
  const int na = L.deg_begin[std::min(cap, kJetOrder) + 1];
  for (int i = 0; i < na; ++i) {
    const cxd ai = a.c_[i];
    if (ai == cxd(0, 0)) continue;
    const int rem = cap - L.deg[i];
    const int nb = L.deg_begin[rem + 1];
    const std::int32_t* row = prod + std::size_t(i) * L.ncoef;
    for (int j = 0; j < nb; ++j) {
      const cxd bj = b.c_[j];
      if (bj == cxd(0, 0)) continue;
      r.c_[row[j]] += ai * bj;
    }
  }
  return r;
}

TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
  if (a.lay_ != b.lay_) fail(errc::config_error, "jet dimension mismatch");
  return mul_impl(a, b);
}

TaylorJet TaylorJet::dz(int v) const {
  if (order_ < 1) fail(errc::insufficient_order, "jet order exhausted by derivative");
  TaylorJet r(lay_->n);
  r.order_ = order_ - 1;
  const auto* dst = lay_->dz_dst.data() + std::size_t(v) * lay_->ncoef;
  const auto* fac = lay_->dz_fac.data() + std::size_t(v) * lay_->ncoef;
  for (int i = 0; i < lay_->ncoef; ++i)
    if (dst[i] >= 0) r.c_[dst[i]] += fac[i] * c_[i];
  return r;
}

TaylorJet TaylorJet::dzb(int v) const {
  if (order_ < 1) fail(errc::insufficient_order, "jet order exhausted by derivative");
  TaylorJet r(lay_->n);
  r.order_ = order_ - 1;
  const auto* dst = lay_->dzb_dst.data() + std::size_t(v) * lay_->ncoef;
  const auto* fac = lay_->dzb_fac.data() + std::size_t(v) * lay_->ncoef;
  for (int i = 0; i < lay_->ncoef; ++i)
    if (dst[i] >= 0) r.c_[dst[i]] += fac[i] * c_[i];
  return r;
}

TaylorJet TaylorJet::conjugate() const {
  TaylorJet r(lay_->n);
  r.order_ = order_;
  for (int i = 0; i < lay_->ncoef; ++i) r.c_[lay_->conj_perm[i]] = std::conj(c_[i]);
  return r;
}

bool TaylorJet::is_real(double tol) const {
  for (int i = 0; i < lay_->ncoef; ++i) {
    const cxd d = c_[i] - std::conj(c_[lay_->conj_perm[i]]);
    if (std::abs(d) > tol) return false;
  }
  return true;
}

TaylorJet TaylorJet::reciprocal(const TaylorJet& f) {
  const cxd c = f.c_[0];
  if (std::abs(c) == 0.0) fail(errc::config_error, "reciprocal of jet vanishing at base");
  TaylorJet u = f;
  u.c_[0] = cxd(0, 0);
  u *= -1.0 / c;
  // 1/f = (1/c) * sum_k u^k with u = -(f - c)/c
  TaylorJet r = TaylorJet::constant(f.nvars(), cxd(1, 0));
  r.order_ = f.order_;
  TaylorJet p = TaylorJet::constant(f.nvars(), cxd(1, 0));
  p.order_ = f.order_;
  for (int k = 1; k <= kJetOrder; ++k) {
    p = mul_impl(p, u);
    p.order_ = f.order_;  // u has zero constant term; powers stay exact
    r += p;
  }
  r *= 1.0 / c;
  r.order_ = f.order_;
  return r;
}

TaylorJet TaylorJet::series_(const TaylorJet& u, std::span<const double> a, int order) {
  TaylorJet r = TaylorJet::constant(u.nvars(), cxd(a[0], 0));
  r.order_ = order;
  TaylorJet p = TaylorJet::constant(u.nvars(), cxd(1, 0));
  p.order_ = order;
  for (int k = 1; k <= kJetOrder && k < int(a.size()); ++k) {
    p = mul_impl(p, u);
    p.order_ = order;
    TaylorJet t = p;
    t *= a[k];
    r += t;
  }
  return r;
}

TaylorJet TaylorJet::exp(const TaylorJet& f) {
  TaylorJet u = f;
  const cxd c = u.c_[0];
  u.c_[0] = cxd(0, 0);
  const double a[] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  TaylorJet r = series_(u, a, f.order_);
  r *= std::exp(c);
  return r;
}

TaylorJet TaylorJet::sin(const TaylorJet& f) {
  TaylorJet u = f;
  const cxd c = u.c_[0];
  u.c_[0] = cxd(0, 0);
  const double as[] = {0.0, 1.0, 0.0, -1.0 / 6.0, 0.0};
  const double ac[] = {1.0, 0.0, -0.5, 0.0, 1.0 / 24.0};
  TaylorJet su = series_(u, as, f.order_);
  TaylorJet cu = series_(u, ac, f.order_);
  su *= std::cos(c);
  cu *= std::sin(c);
  return su + cu;  // sin(c + u) = sin c cos u + cos c sin u
}

TaylorJet TaylorJet::cos(const TaylorJet& f) {
  TaylorJet u = f;
  const cxd c = u.c_[0];
  u.c_[0] = cxd(0, 0);
  const double as[] = {0.0, 1.0, 0.0, -1.0 / 6.0, 0.0};
  const double ac[] = {1.0, 0.0, -0.5, 0.0, 1.0 / 24.0};
  TaylorJet cu = series_(u, ac, f.order_);
  TaylorJet su = series_(u, as, f.order_);
  cu *= std::cos(c);
  su *= -std::sin(c);
  return cu + su;  // cos(c + u) = cos c cos u - sin c sin u
}

double TaylorJet::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& v : c_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace jeq
