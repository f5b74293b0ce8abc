// Command-line front end for the J-equation toolkit.
//
// Subcommands:
//   identities    commutation-identity residual suite over the metric catalog
//   subsolution   admissibility / subsolution / cone inequalities over a grid
//   solve         damped Newton solve of tr(gfrak^{-1} g) = n/psi
//   monitor       estimate report for a saved solution field
//   convergence   manufactured-solution error ratio at two resolutions
//
// Exit codes: 0 success, 2 numerical failure, 3 configuration/input error.
// JEQ_THREADS caps kernel parallelism; orchestration here is single-threaded.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jeq/chern.hpp"
#include "jeq/config.hpp"
#include "jeq/field_io.hpp"
#include "jeq/monitor.hpp"
#include "jeq/parallel.hpp"
#include "jeq/pointwise.hpp"
#include "jeq/report.hpp"
#include "jeq/solver.hpp"
#include "jeq/stencil.hpp"

namespace {

using namespace jeq;

constexpr double kIdentityGate = 1e-8;

std::string fnum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

// Strips the "Name: " prefix error() prepends, for re-wrapping messages.
std::string error_detail(const error& e) {
  std::string w = e.what();
  std::size_t colon = w.find(": ");
  return colon == std::string::npos ? w : w.substr(colon + 2);
}

// ---------------------------------------------------------------------------

int run_identities(const std::string& config_path, int points, std::uint64_t seed,
                   bool seed_given, const std::string& json_path) {
  if (!config_path.empty()) {
    ProblemConfig cfg = parse_config(config_path);
    if (!seed_given) seed = cfg.seed;
  }
  if (points < 1) fail(errc::config_error, "--points must be positive");

  std::printf("commutation-identity residuals, %d base points per entry, seed %llu\n",
              points, (unsigned long long)seed);
  double worst_abs = 0.0, worst_rel = 0.0;
  json suites = json::array();
  for (int n : {2, 3}) {
    IdentitySuiteResult r = identity_suite(n, points, seed);
    std::printf("\nn = %d\n", n);
    std::printf("  %-20s %12s %14s %14s %14s %14s\n", "entry", "third",
                "fourth_mixed", "fourth_pairs", "torsion_asym", "curv_conj");
    json entries = json::array();
    for (const EntryIdentityReport& e : r.entries) {
      std::printf("  %-20s %12.3e %14.3e %14.3e %14.3e %14.3e%s\n", e.entry.c_str(),
                  e.third, e.fourth_mixed, e.fourth_pairs, e.torsion_antisym,
                  e.curvature_conj, e.torsion_free ? "  (torsion-free)" : "");
      json je;
      je["entry"] = e.entry;
      je["torsion_free"] = e.torsion_free;
      je["third"] = e.third;
      je["fourth_mixed"] = e.fourth_mixed;
      je["fourth_pairs"] = e.fourth_pairs;
      je["third_rel"] = e.third_rel;
      je["fourth_mixed_rel"] = e.fourth_mixed_rel;
      je["fourth_pairs_rel"] = e.fourth_pairs_rel;
      je["torsion_antisym"] = e.torsion_antisym;
      je["curvature_conj"] = e.curvature_conj;
      je["torsion_max"] = e.torsion_max;
      entries.push_back(std::move(je));
    }
    worst_abs = std::max(worst_abs, r.worst_abs);
    worst_rel = std::max(worst_rel, r.worst_rel);
    json js;
    js["n"] = n;
    js["worst_abs"] = r.worst_abs;
    js["worst_rel"] = r.worst_rel;
    js["entries"] = std::move(entries);
    suites.push_back(std::move(js));
  }
  bool pass = worst_abs <= kIdentityGate;
  std::printf("\nworst residual %.3e (gate %.0e): %s\n", worst_abs, kIdentityGate,
              pass ? "pass" : "FAIL");
  if (!json_path.empty()) {
    json j;
    j["points"] = points;
    j["seed"] = seed;
    j["gate"] = kIdentityGate;
    j["worst_abs"] = worst_abs;
    j["worst_rel"] = worst_rel;
    j["pass"] = pass;
    j["suites"] = std::move(suites);
    emit_json(j, json_path == "-" ? std::string() : json_path);
  }
  return pass ? 0 : 2;
}

// ---------------------------------------------------------------------------

int run_subsolution(const std::string& config_path, const std::string& json_path) {
  ProblemConfig cfg = parse_config(config_path);
  if (!cfg.psi.present())
    fail(errc::config_error, "subsolution check needs psi in the config");
  Grid grid = cfg.grid();
  HermitianField g = build_metric(cfg, grid);
  HermitianField chi = build_chi(cfg, grid);
  ScalarField usub = build_scalar(cfg.usub, grid, "usub", 0.0);
  ScalarField psi = build_scalar(cfg.psi, grid, "psi", 1.0);

  GfrakField gf = gfrak_field(chi, usub);
  std::printf("%s: chi + Hess(usub), smallest eigenvalue margin %s at %s\n",
              grid.describe().c_str(), fnum(gf.min_margin).c_str(),
              grid.index_string(gf.argmin).c_str());
  if (!(gf.min_margin > 0))
    fail(errc::positivity_lost, "chi + Hess(usub) is not positive definite at " +
                                    grid.index_string(gf.argmin));

  double sub_min = 0.0, cone_min = 0.0;
  std::size_t sub_arg = 0, cone_arg = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (psi[p] <= 0)
      fail(errc::config_error,
           "psi must be positive, got " + fnum(psi[p]) + " at " + grid.index_string(p));
    RelativeSpectrum s;
    double sm = 0.0, cm = 0.0;
    try {
      s = relative_spectrum(gf.field.matrix(p), g.matrix(p));
      sm = subsolution_margin(s, psi[p]);
      cm = cone_margin(s, psi[p]);
    } catch (const error& e) {
      throw error(e.code(), "grid index " + grid.index_string(p) + ": " + error_detail(e));
    }
    if (p == 0 || sm < sub_min) { sub_min = sm; sub_arg = p; }
    if (p == 0 || cm < cone_min) { cone_min = cm; cone_arg = p; }
    if (!subsolution_check(s, psi[p])) {
      std::printf("subsolution check: FAIL at %s: sum 1/lambda exceeds n/psi = %s by %s\n",
                  grid.index_string(p).c_str(), fnum(double(grid.n()) / psi[p]).c_str(),
                  fnum(-sm).c_str());
      fail(errc::subsolution_violation,
           "subsolution inequality fails at grid index " + grid.index_string(p));
    }
  }
  std::printf("subsolution margin: min %s at %s   (n/psi - sum 1/lambda_i >= 0)\n",
              fnum(sub_min).c_str(), grid.index_string(sub_arg).c_str());
  std::printf("cone margin:        min %s at %s   (strict over every deleted index)\n",
              fnum(cone_min).c_str(), grid.index_string(cone_arg).c_str());
  bool cone_ok = cone_min > 0;
  std::printf("subsolution check: pass%s\n",
              cone_ok ? "" : " (cone inequality NOT strict everywhere)");

  if (!json_path.empty()) {
    json j;
    json problem;
    problem["n"] = grid.n();
    problem["topology"] = topology_name(grid.topology());
    problem["shape"] = grid.shape();
    j["problem"] = std::move(problem);
    j["positivity_margin_min"] = gf.min_margin;
    j["positivity_argmin"] = grid.index_string(gf.argmin);
    j["subsolution_margin_min"] = sub_min;
    j["subsolution_argmin"] = grid.index_string(sub_arg);
    j["cone_margin_min"] = cone_min;
    j["cone_argmin"] = grid.index_string(cone_arg);
    j["pass"] = true;
    emit_json(j, json_path == "-" ? std::string() : json_path);
  }
  return cone_ok ? 0 : 2;
}

// ---------------------------------------------------------------------------

int run_solve(const std::string& config_path, bool with_monitor,
              const std::string& json_path) {
  ProblemConfig cfg = parse_config(config_path);
  Grid grid = cfg.grid();
  HermitianField g = build_metric(cfg, grid);
  HermitianField chi = build_chi(cfg, grid);
  ScalarField usub = build_scalar(cfg.usub, grid, "usub", 0.0);

  bool closed = grid.periodic();
  SolveResult res;
  ScalarField psi_mon;  // what the estimate report divides by
  if (closed) {
    if (cfg.psi.present())
      std::printf("note: periodic problem solves for the right-hand constant; "
                  "config psi is ignored\n");
    std::printf("%s: closed problem, solving for (u, c) with mean-zero u\n",
                grid.describe().c_str());
    res = solve_closed(chi, g, cfg.solve, cfg.usub.present() ? &usub : nullptr);
    psi_mon = ScalarField(grid, double(grid.n()) / res.state.c);
  } else {
    if (!cfg.psi.present())
      fail(errc::config_error, "box problems need psi in the config");
    ScalarField psi = build_scalar(cfg.psi, grid, "psi", 1.0);
    ScalarField phi = cfg.phi.present() ? build_scalar(cfg.phi, grid, "phi", 0.0) : usub;
    std::printf("%s: Dirichlet problem\n", grid.describe().c_str());
    res = solve_dirichlet(chi, g, psi, phi, usub, cfg.solve);
    psi_mon = std::move(psi);
  }

  if (closed)
    std::printf("converged in %d steps: residual %s, positivity margin %s, c = %.12g\n",
                int(res.state.step_history.size()), fnum(res.state.residual_norm).c_str(),
                fnum(res.state.positivity_margin).c_str(), res.state.c);
  else
    std::printf("converged in %d steps: residual %s, positivity margin %s\n",
                int(res.state.step_history.size()), fnum(res.state.residual_norm).c_str(),
                fnum(res.state.positivity_margin).c_str());

  std::error_code ec;
  std::filesystem::create_directories(cfg.output, ec);
  if (ec)
    fail(errc::io_error, "cannot create output directory '" + cfg.output + "': " +
                             ec.message());

  json report = solve_to_json(grid, res, closed);
  if (with_monitor) {
    EstimateReport est = estimate_monitor(res.state.u, usub, chi, g, psi_mon,
                                          cfg.a_grad, cfg.a_hess, cfg.solved_tol);
    report["estimate"] = estimate_to_json(est);
    emit_json(estimate_to_json(est), join_path(cfg.output, "estimate.json"));
    std::printf("wrote %s\n", join_path(cfg.output, "estimate.json").c_str());
  }

  std::string upath = join_path(cfg.output, "solution.csv");
  write_field(upath, res.state.u);
  std::printf("wrote %s\n", upath.c_str());
  emit_json(report, join_path(cfg.output, "convergence.json"));
  std::printf("wrote %s\n", join_path(cfg.output, "convergence.json").c_str());
  write_history_csv(join_path(cfg.output, "history.csv"), res.state.step_history);
  std::printf("wrote %s\n", join_path(cfg.output, "history.csv").c_str());
  if (!json_path.empty()) emit_json(report, json_path == "-" ? std::string() : json_path);
  return 0;
}

// ---------------------------------------------------------------------------

int run_monitor(const std::string& config_path, const std::string& field_path,
                const std::string& json_path) {
  ProblemConfig cfg = parse_config(config_path);
  Grid grid = cfg.grid();
  if (!cfg.psi.present())
    fail(errc::config_error,
         "monitor needs psi in the config (for closed problems pass the constant "
         "n/c from the solve report)");
  HermitianField g = build_metric(cfg, grid);
  HermitianField chi = build_chi(cfg, grid);
  ScalarField usub = build_scalar(cfg.usub, grid, "usub", 0.0);
  ScalarField psi = build_scalar(cfg.psi, grid, "psi", 1.0);
  ScalarField u = read_scalar_field(field_path, grid);

  EstimateReport est = estimate_monitor(u, usub, chi, g, psi, cfg.a_grad, cfg.a_hess,
                                        cfg.solved_tol);
  emit_json(estimate_to_json(est), json_path == "-" ? std::string() : json_path);
  if (!json_path.empty() && json_path != "-")
    std::printf("wrote %s\n", json_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------

int run_convergence(const std::string& config_path, const std::string& json_path) {
  ProblemConfig cfg = parse_config(config_path);
  if (cfg.topology != Topology::box)
    fail(errc::config_error, "convergence runs the manufactured Dirichlet problem; "
                             "set topology = box");
  if (!cfg.metric.flat)
    fail(errc::config_error,
         "convergence needs a resolution-independent metric (metric = flat)");
  if (!cfg.chi.path.empty())
    fail(errc::config_error, "convergence needs a resolution-independent chi "
                             "(scalar or ddbar form, not csv)");

  std::string ustar_text = cfg.manufactured;
  if (ustar_text.empty()) {
    if (cfg.n != 2)
      fail(errc::config_error,
           "the built-in manufactured solution is for n = 2; set manufactured = "
           "<expression> for n = " + std::to_string(cfg.n));
    ustar_text = "0.1*sin(2*pi*x1)*sin(2*pi*x2)"
                 "*16*y1^2*(1-y1)^2*16*y2^2*(1-y2)^2";
  }
  Expression ustar = Expression::parse(ustar_text, cfg.n);
  ComplexHessianExpr ustar_hess = complex_hessian_expr(ustar, cfg.n);
  ComplexHessianExpr chi_hess;  // analytic Hessian of the chi potential
  if (cfg.chi.has_potential) chi_hess = complex_hessian_expr(cfg.chi.potential, cfg.n);

  SolveConfig scfg = cfg.solve;
  // The analytic right-hand side differs from the discrete operator by
  // O(h^2), so u* itself narrowly misses the discrete subsolution
  // inequality; the solve is started at u* and positivity is still enforced
  // at every accepted iterate.
  scfg.require_subsolution = false;

  struct Level {
    int points = 0;
    double h = 0.0, sup_error = 0.0;
    int iterations = 0;
    std::vector<StepRecord> steps;
  };
  std::vector<Level> levels;
  std::error_code dir_ec;
  std::filesystem::create_directories(cfg.output, dir_ec);
  if (dir_ec)
    fail(errc::io_error, "cannot create output directory '" + cfg.output + "': " +
                             dir_ec.message());

  for (int points : {cfg.coarse, cfg.fine}) {
    Grid grid = Grid::uniform(cfg.n, Topology::box, points);
    HermitianField g(grid, HermitianMatrix::identity(cfg.n));
    HermitianField chi_f = build_chi(cfg, grid);
    ScalarField ustar_f = eval_on_grid(ustar, grid);

    // psi* = n / tr(gfrak*^{-1} g) from the analytic Hessians, pointwise.
    ScalarField psi(grid);
    HermitianMatrix base = cfg.chi.scale * HermitianMatrix::identity(cfg.n);
    parallel_for(grid.size(), [&](std::size_t p) {
      int multi[16];
      double xy[16];
      grid.unravel(p, multi);
      grid.coordinates(multi, xy);
      std::span<const double> at(xy, std::size_t(grid.axes()));
      HermitianMatrix m = base;
      m += eval_hessian(ustar_hess, at);
      if (cfg.chi.has_potential) m += eval_hessian(chi_hess, at);
      psi[p] = double(cfg.n) / j_operator(m, HermitianMatrix::identity(cfg.n));
    });

    SolveResult res = solve_dirichlet(chi_f, g, psi, ustar_f, ustar_f, scfg);
    ScalarField err = res.state.u;
    err -= ustar_f;

    Level lv;
    lv.points = points;
    lv.h = 1.0 / (points - 1);
    lv.sup_error = sup_norm(err);
    lv.iterations = int(res.state.step_history.size());
    lv.steps = res.state.step_history;
    levels.push_back(std::move(lv));
  }

  const Level& c = levels[0];
  const Level& f = levels[1];
  write_history_csv(join_path(cfg.output, "coarse_history.csv"), c.steps);
  write_history_csv(join_path(cfg.output, "fine_history.csv"), f.steps);

  double ratio = c.sup_error / f.sup_error;
  double expected = (c.h / f.h) * (c.h / f.h);
  double lo = 0.75 * expected, hi = 1.25 * expected;
  std::printf("coarse %d^%d (h = %s): sup error %.6e  (%d Newton steps)\n", c.points,
              2 * cfg.n, fnum(c.h).c_str(), c.sup_error, c.iterations);
  std::printf("fine   %d^%d (h = %s): sup error %.6e  (%d Newton steps)\n", f.points,
              2 * cfg.n, fnum(f.h).c_str(), f.sup_error, f.iterations);
  std::printf("ratio %.4f (expected near (h_c/h_f)^2 = %s, accepted [%s, %s])\n", ratio,
              fnum(expected).c_str(), fnum(lo).c_str(), fnum(hi).c_str());
  bool pass = ratio >= lo && ratio <= hi;
  std::printf("convergence check: %s\n", pass ? "pass" : "FAIL");

  if (!json_path.empty()) {
    json j;
    j["manufactured"] = ustar_text;
    json jc, jf;
    jc["points"] = c.points;
    jc["h"] = c.h;
    jc["sup_error"] = c.sup_error;
    jc["iterations"] = c.iterations;
    jf["points"] = f.points;
    jf["h"] = f.h;
    jf["sup_error"] = f.sup_error;
    jf["iterations"] = f.iterations;
    j["coarse"] = std::move(jc);
    j["fine"] = std::move(jf);
    j["ratio"] = ratio;
    j["accepted_low"] = lo;
    j["accepted_high"] = hi;
    j["pass"] = pass;
    emit_json(j, json_path == "-" ? std::string() : json_path);
  }
  return pass ? 0 : 2;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  jeq::init_threads_from_env();

  CLI::App app{"J-equation toolkit: tr((chi + Hess u)^{-1} g) = n/psi on flat "
               "tori and box domains"};
  app.require_subcommand(1);

  std::string config_path, json_path, field_path;
  int points = 100;
  std::uint64_t seed = 0;
  bool monitor_flag = false;

  CLI::App* cid = app.add_subcommand(
      "identities", "verify the derivative commutation identities over the metric catalog");
  cid->add_option("--config", config_path, "problem config (supplies the default seed)");
  cid->add_option("--points", points, "base points per catalog entry (default 100)");
  CLI::Option* seed_opt = cid->add_option("--seed", seed, "sampling seed (default 0)");
  cid->add_option("--json", json_path, "write a JSON report here ('-' for stdout)");

  CLI::App* csub = app.add_subcommand(
      "subsolution", "check admissibility, subsolution, and cone inequalities over the grid");
  csub->add_option("--config", config_path, "problem config")->required();
  csub->add_option("--json", json_path, "write a JSON report here ('-' for stdout)");

  CLI::App* csol =
      app.add_subcommand("solve", "solve the equation by damped Newton iteration");
  csol->add_option("--config", config_path, "problem config")->required();
  csol->add_flag("--monitor", monitor_flag, "also emit the estimate report");
  csol->add_option("--json", json_path, "also emit the solve report here ('-' for stdout)");

  CLI::App* cmon =
      app.add_subcommand("monitor", "estimate report for a saved solution field");
  cmon->add_option("--config", config_path, "problem config")->required();
  cmon->add_option("--field", field_path, "solution field CSV")->required();
  cmon->add_option("--json", json_path, "write the report here instead of stdout");

  CLI::App* ccon = app.add_subcommand(
      "convergence", "manufactured-solution error ratio at two resolutions");
  ccon->add_option("--config", config_path, "problem config")->required();
  ccon->add_option("--json", json_path, "write a JSON report here ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (cid->parsed())
      return run_identities(config_path, points, seed, seed_opt->count() > 0, json_path);
    if (csub->parsed()) return run_subsolution(config_path, json_path);
    if (csol->parsed()) return run_solve(config_path, monitor_flag, json_path);
    if (cmon->parsed()) return run_monitor(config_path, field_path, json_path);
    if (ccon->parsed()) return run_convergence(config_path, json_path);
  } catch (const jeq::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return jeq::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
