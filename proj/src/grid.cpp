#include "jeq/grid.hpp"

#include <limits>

namespace jeq {

const char* topology_name(Topology t) {
  return t == Topology::periodic ? "periodic" : "box";
}

Grid::Grid(int n, Topology topology, std::vector<int> shape)
    : n_(n), topology_(topology), shape_(std::move(shape)) {
  if (n_ < 1 || n_ > 8)
    fail(errc::config_error,
         "complex dimension n must be in [1, 8], got " + std::to_string(n_));
  if (int(shape_.size()) != 2 * n_)
    fail(errc::config_error, "grid shape needs " + std::to_string(2 * n_) +
                                 " axis extents, got " +
                                 std::to_string(shape_.size()));
  for (int s : shape_)
    if (s < 4)
      fail(errc::grid_too_small, "axis extent " + std::to_string(s) +
                                     " is below the 4-point stencil minimum");
  spacing_.resize(shape_.size());
  for (std::size_t a = 0; a < shape_.size(); ++a)
    spacing_[a] = topology_ == Topology::periodic ? 1.0 / shape_[a]
                                                  : 1.0 / (shape_[a] - 1);
  strides_.assign(shape_.size(), 1);
  std::size_t sz = 1;
  for (int a = int(shape_.size()) - 1; a >= 0; --a) {
    strides_[std::size_t(a)] = sz;
    if (sz > (std::size_t(1) << 31) / std::size_t(shape_[std::size_t(a)]))
      fail(errc::config_error, "grid has more than 2^31 points");
    sz *= std::size_t(shape_[std::size_t(a)]);
  }
  size_ = sz;
}

Grid Grid::uniform(int n, Topology topology, int points_per_axis) {
  return Grid(n, topology, std::vector<int>(std::size_t(2 * n), points_per_axis));
}

std::size_t Grid::linear(std::span<const int> multi) const {
  std::size_t p = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a)
    p += std::size_t(multi[a]) * strides_[a];
  return p;
}

void Grid::unravel(std::size_t p, int* multi) const {
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    multi[a] = int(p / strides_[a]);
    p %= strides_[a];
  }
}

void Grid::coordinates(const int* multi, double* x) const {
  for (std::size_t a = 0; a < shape_.size(); ++a) x[a] = multi[a] * spacing_[a];
}

bool Grid::is_boundary(const int* multi) const {
  if (topology_ == Topology::periodic) return false;
  for (std::size_t a = 0; a < shape_.size(); ++a)
    if (multi[a] == 0 || multi[a] == shape_[a] - 1) return true;
  return false;
}

bool Grid::is_boundary(std::size_t p) const {
  if (topology_ == Topology::periodic) return false;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    int idx = int(p / strides_[a]);
    p %= strides_[a];
    if (idx == 0 || idx == shape_[a] - 1) return true;
  }
  return false;
}

std::size_t Grid::interior_count() const {
  if (topology_ == Topology::periodic) return size_;
  std::size_t c = 1;
  for (int s : shape_) c *= std::size_t(s - 2);
  return c;
}

bool Grid::same_layout(const Grid& o) const {
  return n_ == o.n_ && topology_ == o.topology_ && shape_ == o.shape_;
}

std::string Grid::describe() const {
  std::string s = topology_name(topology_);
  s += ' ';
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (a) s += 'x';
    s += std::to_string(shape_[a]);
  }
  s += " (n=" + std::to_string(n_) + ")";
  return s;
}

std::string Grid::index_string(std::size_t p) const {
  std::string s = "(";
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (a) s += ',';
    s += std::to_string(p / strides_[a]);
    p %= strides_[a];
  }
  s += ')';
  return s;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_layout(grid_, o.grid_, "ScalarField::operator+=");
  for (std::size_t p = 0; p < v_.size(); ++p) v_[p] += o.v_[p];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_layout(grid_, o.grid_, "ScalarField::operator-=");
  for (std::size_t p = 0; p < v_.size(); ++p) v_[p] -= o.v_[p];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& x : v_) x *= s;
  return *this;
}

HermitianField::HermitianField(const Grid& grid, const HermitianMatrix& fill)
    : HermitianField(grid) {
  if (fill.dim() != dim())
    fail(errc::config_error, "HermitianField fill has dimension " +
                                 std::to_string(fill.dim()) + ", grid has n=" +
                                 std::to_string(dim()));
  const std::size_t nn = std::size_t(dim()) * std::size_t(dim());
  for (std::size_t p = 0; p < size(); ++p)
    for (std::size_t k = 0; k < nn; ++k) v_[p * nn + k] = fill.data()[k];
}

HermitianMatrix HermitianField::matrix(std::size_t p) const {
  return HermitianMatrix::from_data(dim(), at(p));
}

void HermitianField::set_matrix(std::size_t p, const HermitianMatrix& m) {
  if (m.dim() != dim())
    fail(errc::config_error, "set_matrix dimension mismatch");
  const std::size_t nn = std::size_t(dim()) * std::size_t(dim());
  cxd* dst = at(p);
  for (std::size_t k = 0; k < nn; ++k) dst[k] = m.data()[k];
}

}  // namespace jeq
