// Throughput comparison of the OpenMP grid kernels against the serial
// reference implementations, with a bitwise agreement check on each output.
// Usage: jeq_bench [--n N] [--points P] [--reps R]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jeq/grid.hpp"
#include "jeq/parallel.hpp"
#include "jeq/rng.hpp"
#include "jeq/serial_ref.hpp"
#include "jeq/stencil.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
double time_best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = clock_type::now();
    f();
    auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool same_bits(const jeq::ScalarField& a, const jeq::ScalarField& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_bits(const jeq::HermitianField& a, const jeq::HermitianField& b) {
  const std::size_t bytes =
      a.size() * std::size_t(a.dim()) * std::size_t(a.dim()) * sizeof(jeq::cxd);
  return a.size() == b.size() && a.dim() == b.dim() &&
         std::memcmp(a.at(0), b.at(0), bytes) == 0;
}

void row(const char* name, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-22s %12.3f %12.3f %10.2fx   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, match ? "bitwise" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  jeq::init_threads_from_env();

  CLI::App app{"serial vs OpenMP kernel throughput"};
  int n = 2;
  int points = 17;
  int reps = 3;
  app.add_option("--n", n, "complex dimension")->check(CLI::Range(1, 4));
  app.add_option("--points", points, "grid points per axis")->check(CLI::Range(4, 96));
  app.add_option("--reps", reps, "repetitions (best-of)")->check(CLI::Range(1, 50));
  CLI11_PARSE(app, argc, argv);

  const jeq::Grid grid = jeq::Grid::uniform(n, jeq::Topology::periodic, points);
  std::printf("grid %s, %zu points, %d thread(s), best of %d\n\n",
              grid.describe().c_str(), grid.size(), jeq::max_threads(), reps);
  std::printf("%-22s %12s %12s %10s\n", "kernel", "serial ms", "openmp ms", "speedup");

  jeq::rng r(42);
  // rough per-point noise, scaled by h^2/n so chi + Hess u stays positive
  const double h = grid.spacing(0);
  const double amp = 0.5 * h * h / n;
  jeq::ScalarField u(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) u[p] = r.uniform(-amp, amp);
  jeq::ScalarField v(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) v[p] = r.uniform(-0.5, 0.5);
  jeq::ScalarField psi(grid, 1.0);
  const jeq::HermitianField chi(grid, 3.0 * jeq::HermitianMatrix::identity(n));
  const jeq::HermitianField g(grid, jeq::HermitianMatrix::identity(n));

  jeq::HermitianField hess_s, hess_p;
  row("complex_hessian",
      time_best_ms(reps, [&] { hess_s = jeq::serial::complex_hessian(u); }),
      time_best_ms(reps, [&] { hess_p = jeq::complex_hessian(u); }),
      same_bits(hess_s, hess_p));

  jeq::GfrakField gf_s, gf_p;
  row("gfrak_field",
      time_best_ms(reps, [&] { gf_s = jeq::serial::gfrak_field(chi, u); }),
      time_best_ms(reps, [&] { gf_p = jeq::gfrak_field(chi, u); }),
      same_bits(gf_s.field, gf_p.field) && gf_s.min_margin == gf_p.min_margin);

  jeq::ScalarField res_s, res_p;
  row("residual_field",
      time_best_ms(reps, [&] { res_s = jeq::serial::residual_field(gf_s.field, g, psi); }),
      time_best_ms(reps, [&] { res_p = jeq::residual_field(gf_p.field, g, psi); }),
      same_bits(res_s, res_p));

  jeq::ScalarField app_s, app_p;
  row("hessian_trace_apply",
      time_best_ms(reps, [&] { app_s = jeq::serial::hessian_trace_apply(g, v); }),
      time_best_ms(reps, [&] { app_p = jeq::hessian_trace_apply(g, v); }),
      same_bits(app_s, app_p));

  double mv_s = 0, mv_p = 0;
  row("mean_value",
      time_best_ms(reps, [&] { mv_s = jeq::serial::mean_value(u); }),
      time_best_ms(reps, [&] { mv_p = jeq::mean_value(u); }), mv_s == mv_p);

  double sn_s = 0, sn_p = 0;
  row("sup_norm",
      time_best_ms(reps, [&] { sn_s = jeq::serial::sup_norm(res_s); }),
      time_best_ms(reps, [&] { sn_p = jeq::sup_norm(res_p); }), sn_s == sn_p);

  return 0;
}
