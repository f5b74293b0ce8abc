#pragma once

// Uniform grids on [0,1]^{2n} carrying the complex pairing z_k = x_k + i y_k
// (real axis k-1 holds x_k, axis n+k-1 holds y_k), plus the per-point field
// containers shared by the stencil and solver layers.
//
// Periodic axes cover [0,1) with spacing 1/shape[a]; box axes include both
// endpoints with spacing 1/(shape[a]-1), and the points with some axis index
// at either end form the boundary set. Points are linearized row-major with
// the last axis fastest, and every field stores one value block per point in
// that order.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jeq/error.hpp"
#include "jeq/pointwise.hpp"

namespace jeq {

enum class Topology { periodic, box };

const char* topology_name(Topology t);

class Grid {
 public:
  Grid() = default;
  // shape: one entry per real axis (2n of them). Rejects n outside [1, 8]
  // and wrong shape length with ConfigError, axis extents below 4 with
  // GridTooSmall (the difference stencils need four points per axis).
  Grid(int n, Topology topology, std::vector<int> shape);
  static Grid uniform(int n, Topology topology, int points_per_axis);

  int n() const { return n_; }
  int axes() const { return 2 * n_; }
  Topology topology() const { return topology_; }
  bool periodic() const { return topology_ == Topology::periodic; }
  const std::vector<int>& shape() const { return shape_; }
  int extent(int axis) const { return shape_[std::size_t(axis)]; }
  double spacing(int axis) const { return spacing_[std::size_t(axis)]; }
  std::size_t stride(int axis) const { return strides_[std::size_t(axis)]; }
  std::size_t size() const { return size_; }

  std::size_t linear(std::span<const int> multi) const;
  // multi must have axes() slots.
  void unravel(std::size_t p, int* multi) const;
  double coordinate(int axis, int index) const {
    return index * spacing_[std::size_t(axis)];
  }
  // x must have axes() slots.
  void coordinates(const int* multi, double* x) const;

  bool is_boundary(const int* multi) const;
  bool is_boundary(std::size_t p) const;
  std::size_t interior_count() const;

  bool same_layout(const Grid& o) const;
  std::string describe() const;                   // "periodic 16x16x16x16 (n=2)"
  std::string index_string(std::size_t p) const;  // "(3,0,7,15)"

 private:
  int n_ = 0;
  Topology topology_ = Topology::periodic;
  std::vector<int> shape_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

inline void require_same_layout(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_layout(b))
    fail(errc::config_error, std::string(what) + ": field grids differ (" +
                                 a.describe() + " vs " + b.describe() + ")");
}

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0)
      : grid_(grid), v_(grid.size(), fill) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t p) const { return v_[p]; }
  double& operator[](std::size_t p) { return v_[p]; }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> v_;
};

// One n-by-n Hermitian block per point, stored row-major and contiguous.
// Kernels writing through at() must keep each block Hermitian (fill the
// upper triangle and mirror); set_matrix enforces it for callers.
class HermitianField {
 public:
  HermitianField() = default;
  explicit HermitianField(const Grid& grid)
      : grid_(grid),
        v_(grid.size() * std::size_t(grid.n()) * std::size_t(grid.n()), cxd(0, 0)) {}
  HermitianField(const Grid& grid, const HermitianMatrix& fill);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.n(); }
  std::size_t size() const { return grid_.size(); }
  cxd* at(std::size_t p) {
    return v_.data() + p * std::size_t(dim()) * std::size_t(dim());
  }
  const cxd* at(std::size_t p) const {
    return v_.data() + p * std::size_t(dim()) * std::size_t(dim());
  }
  HermitianMatrix matrix(std::size_t p) const;
  void set_matrix(std::size_t p, const HermitianMatrix& m);

 private:
  Grid grid_;
  std::vector<cxd> v_;
};

// Scalar summaries of a state: oscillation of u, the gradient/Laplacian
// maxima that the gradient and Hessian bounds control, and the trace
// quantity W = tr_g chi + Laplacian(u) as a field. Boundary maxima are
// populated on box grids and left at zero on periodic ones.
struct Diagnostics {
  double osc = 0.0;
  double grad_max = 0.0;
  double lap_max = 0.0;
  ScalarField W_field;
  double boundary_grad_max = 0.0;
  double boundary_lap_max = 0.0;
};

}  // namespace jeq
