#pragma once

// Closed-form scalar expressions in the grid coordinates x_1..x_n,
// y_1..y_n: sums and products of sin, cos, and polynomials, with exact
// symbolic differentiation. Rich enough for manufactured solutions,
// boundary data, and right-hand sides, without embedding a general
// interpreter.
//
// Grammar (whitespace-insensitive):
//   expr     := term (('+' | '-') term)*
//   term     := factor ('*' factor)*
//   factor   := atom ('^' digits)?            // non-negative integer power
//   atom     := number | 'pi' | variable
//             | 'sin' '(' expr ')' | 'cos' '(' expr ')'
//             | '(' expr ')' | '-' factor | '+' factor
//   variable := x<k> | y<k>                   // 1 <= k <= n
//
// Numbers are ordinary decimal literals (2, 0.5, 1e-3). Variable x_k is
// real axis k-1 and y_k is axis n+k-1, matching the grid layout. Parse
// problems raise ParseError naming the column.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "jeq/error.hpp"
#include "jeq/pointwise.hpp"

namespace jeq {

class Expression {
 public:
  Expression();  // the zero expression

  // Parses text over the 2n variables x1..xn, y1..yn.
  static Expression parse(const std::string& text, int n);
  static Expression constant(double v);

  // Number of complex variables the expression was parsed against (0 for
  // constants, which evaluate under any width).
  int vars() const { return n_; }

  // xy carries the 2n real coordinates (x_1..x_n, y_1..y_n).
  double eval(std::span<const double> xy) const;

  // Exact derivative along real axis a (0..2n-1).
  Expression derivative(int axis) const;

  // Structural combinators (constants fold). Mixing expressions parsed
  // against different n is a ConfigError.
  static Expression sum(const Expression& a, const Expression& b);
  static Expression difference(const Expression& a, const Expression& b);
  static Expression product(const Expression& a, const Expression& b);

  // Parseable rendering (used in error messages and for round-trips).
  std::string str() const;

  struct Node;  // implementation detail, defined in expr.cpp

 private:
  std::shared_ptr<const Node> root_;
  int n_ = 0;
};

// Entries of the complex Hessian of a potential f as expressions:
//   H_{j kbar} = [ (d_{x_j} d_{x_k} + d_{y_j} d_{y_k})
//                  + i (d_{x_j} d_{y_k} - d_{y_j} d_{x_k}) ] f / 4.
// This is the analytic counterpart of the discrete complex_hessian stencil,
// used where exact derivatives are needed (manufactured right-hand sides).
struct ComplexHessianExpr {
  int n = 0;
  std::vector<Expression> re, im;  // row-major n x n

  const Expression& re_at(int j, int k) const { return re[std::size_t(j) * n + k]; }
  const Expression& im_at(int j, int k) const { return im[std::size_t(j) * n + k]; }
};

// Requires f.vars() == 0 or f.vars() == n (ConfigError otherwise).
ComplexHessianExpr complex_hessian_expr(const Expression& f, int n);

// Evaluates the Hessian entries at one point into a Hermitian matrix.
HermitianMatrix eval_hessian(const ComplexHessianExpr& h, std::span<const double> xy);

}  // namespace jeq
