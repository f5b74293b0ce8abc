#pragma once

// Problem configuration: plain `key = value` lines with `#` comments.
// Unknown keys are hard errors so typos never silently change a run.
//
// Keys (defaults in brackets):
//   n          complex dimension, 2..8                          (required)
//   shape      comma list of 2n axis extents                    (required)
//   topology   periodic | box                                   (required)
//   chi        <scale> | ddbar(<expr>) | <scale> + ddbar(<expr>)
//              | csv:<path>                                     (required)
//   metric     flat | csv:<path>                                [flat]
//   psi        <number> | <expression> | csv:<path>             [absent]
//   usub       <number> | <expression> | csv:<path>             [0]
//   phi        <number> | <expression> | csv:<path>             [usub trace]
//   output     directory for solve artifacts                    [.]
//   seed       unsigned integer, randomized reports             [0]
//   a_grad, a_hess, solved_tol       monitor constants          [1, 1, 1e-6]
//   manufactured                     convergence u* expression  [built-in]
//   coarse, fine                     convergence points/axis    [9, 17]
//   max_newton_iters, newton_tol, armijo_factor, min_step, krylov_tol,
//   krylov_max_iters, continuity_steps, positivity_floor,
//   require_subsolution, subsolution_slack    solver overrides
//
// `chi` is a scalar multiple of the background form plus optionally the
// complex Hessian of a potential in the expression grammar (expr.hpp);
// `ddbar` realizes that Hessian with the same stencil the solver uses.
// `psi` is ignored by closed-case solves (the right-hand constant is part
// of the unknown) but feeds box solves and the subsolution/monitor
// subcommands. `phi` is only meaningful on box grids; when absent the
// boundary values of usub are used. Referenced CSV files must exist and
// match the configured n and shape at parse time.

#include <cstdint>
#include <string>
#include <vector>

#include "jeq/expr.hpp"
#include "jeq/grid.hpp"
#include "jeq/solver.hpp"

namespace jeq {

struct ScalarSpec {
  enum class Kind { absent, constant, expression, csv };
  Kind kind = Kind::absent;
  double value = 0.0;  // constant
  std::string text;    // expression source
  Expression expr;     // parsed form of text
  std::string path;    // csv

  bool present() const { return kind != Kind::absent; }
};

struct ChiSpec {
  double scale = 0.0;
  bool has_potential = false;
  std::string potential_text;
  Expression potential;
  std::string path;  // non-empty selects the CSV form
};

struct MetricSpec {
  bool flat = true;
  std::string path;
};

struct ProblemConfig {
  int n = 0;
  std::vector<int> shape;
  Topology topology = Topology::periodic;
  MetricSpec metric;
  ChiSpec chi;
  ScalarSpec psi;
  ScalarSpec usub;
  ScalarSpec phi;
  SolveConfig solve;
  std::string output = ".";
  std::uint64_t seed = 0;
  double a_grad = 1.0;
  double a_hess = 1.0;
  double solved_tol = 1e-6;
  std::string manufactured;  // empty -> built-in default (n = 2)
  int coarse = 9;
  int fine = 17;

  Grid grid() const { return Grid(n, topology, shape); }
};

// Reads and fully validates a config file: defaults filled, unknown keys
// rejected, expressions parsed, referenced CSV headers checked against n and
// shape. Errors are ConfigError naming the key and line (IoError when the
// file cannot be read).
ProblemConfig parse_config(const std::string& path);

// Field materialization against a grid.
HermitianField build_metric(const ProblemConfig& cfg, const Grid& grid);
HermitianField build_chi(const ProblemConfig& cfg, const Grid& grid);

// Materializes a scalar spec; absent specs fill with `fallback`. `name`
// labels errors ("psi", "usub", "phi").
ScalarField build_scalar(const ScalarSpec& spec, const Grid& grid,
                         const char* name, double fallback);

// Evaluates an expression at every grid point.
ScalarField eval_on_grid(const Expression& f, const Grid& grid);

}  // namespace jeq
