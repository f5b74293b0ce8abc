#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "jeq/report.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;  // stdout + stderr
};

struct Sandbox {
  fs::path dir;
  Sandbox() {
    std::string tmpl = (fs::temp_directory_path() / "jeq_cli_XXXXXX").string();
    dir = fs::path(mkdtemp(tmpl.data()));
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  std::string path(const std::string& rel) const { return (dir / rel).string(); }

  void write(const std::string& rel, const std::string& text) const {
    std::ofstream f(path(rel));
    f << text;
  }

  std::string slurp(const std::string& rel) const {
    std::ifstream f(path(rel));
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  // run the binary from inside the sandbox so relative outputs land here
  RunResult run(const std::string& args) const {
    const std::string outfile = path("_cmd_output");
    const std::string cmd =
        "cd " + dir.string() + " && " + JEQ_BIN + " " + args + " > _cmd_output 2>&1";
    int st = std::system(cmd.c_str());
    RunResult r;
    r.code = (st >= 0 && WIFEXITED(st)) ? WEXITSTATUS(st) : -1;
    std::ifstream f(outfile);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    return r;
  }
};

const char* kClosedConfig =
    "n = 2\n"
    "shape = 16,16,16,16\n"
    "topology = periodic\n"
    "chi = 2.0 + ddbar(0.05*sin(2*pi*x1))\n"
    "output = out_closed\n";

}  // namespace

TEST_CASE("subsolution subcommand reproduces the flat example") {
  Sandbox sb;
  sb.write("sub.cfg",
           "n = 2\n"
           "shape = 8,8,8,8\n"
           "topology = periodic\n"
           "chi = 2.0\n"
           "psi = 1.0\n");
  RunResult r = sb.run("subsolution --config sub.cfg --json -");
  CHECK(r.code == 0);
  // chi = 2 I, usub = 0, psi = 1: lambda = (2,2), margins 1 and 1.5
  CHECK(r.out.find("subsolution check: pass") != std::string::npos);
  const std::size_t brace = r.out.find('{');
  REQUIRE(brace != std::string::npos);
  jeq::json j = jeq::json::parse(r.out.substr(brace));
  CHECK(j["subsolution_margin_min"].get<double>() == doctest::Approx(1.0));
  CHECK(j["cone_margin_min"].get<double>() == doctest::Approx(1.5));
  CHECK(j["pass"].get<bool>() == true);

  // scaling psi up to 4 breaks the inequality: numerical failure, exit 2
  sb.write("sub_bad.cfg",
           "n = 2\n"
           "shape = 8,8,8,8\n"
           "topology = periodic\n"
           "chi = 2.0\n"
           "psi = 4.0\n");
  RunResult bad = sb.run("subsolution --config sub_bad.cfg");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("SubsolutionViolation") != std::string::npos);
}

TEST_CASE("configuration errors exit 3 and name the problem") {
  Sandbox sb;

  sb.write("unknown.cfg",
           "n = 2\nshape = 8,8,8,8\ntopology = periodic\nchi = 2.0\nfrobnicate = 1\n");
  RunResult r1 = sb.run("solve --config unknown.cfg");
  CHECK(r1.code == 3);
  CHECK(r1.out.find("frobnicate") != std::string::npos);
  CHECK(r1.out.find("line 5") != std::string::npos);

  sb.write("noshape.cfg", "n = 2\ntopology = periodic\nchi = 2.0\n");
  RunResult r2 = sb.run("solve --config noshape.cfg");
  CHECK(r2.code == 3);
  CHECK(r2.out.find("shape") != std::string::npos);

  sb.write("badexpr.cfg",
           "n = 2\nshape = 8,8,8,8\ntopology = periodic\nchi = 2.0\npsi = sin(x3)\n");
  RunResult r3 = sb.run("subsolution --config badexpr.cfg");
  CHECK(r3.code == 3);  // x3 does not exist when n = 2

  RunResult r4 = sb.run("subsolution --config does_not_exist.cfg");
  CHECK(r4.code == 3);

  RunResult r5 = sb.run("no-such-subcommand");
  CHECK(r5.code == 3);

  RunResult r6 = sb.run("--help");
  CHECK(r6.code == 0);
  CHECK(r6.out.find("solve") != std::string::npos);
}

TEST_CASE("closed solve writes the full artifact set") {
  Sandbox sb;
  sb.write("closed.cfg", kClosedConfig);
  RunResult r = sb.run("solve --config closed.cfg --monitor --json -");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("closed problem") != std::string::npos);

  // artifacts
  CHECK(fs::exists(sb.path("out_closed/solution.csv")));
  CHECK(fs::exists(sb.path("out_closed/convergence.json")));
  CHECK(fs::exists(sb.path("out_closed/history.csv")));
  CHECK(fs::exists(sb.path("out_closed/estimate.json")));

  // the solve report parses; --json - printed the same object to stdout
  jeq::json rep = jeq::json::parse(sb.slurp("out_closed/convergence.json"));
  CHECK(rep["problem"]["n"].get<int>() == 2);
  CHECK(rep["problem"]["topology"].get<std::string>() == "periodic");
  CHECK(std::abs(rep["c"].get<double>() - 1.0) < 1e-10);
  CHECK(rep["residual_norm"].get<double>() <= 1e-10);
  CHECK(rep["positivity_margin"].get<double>() > 1.0);

  // step records decrease monotonically in residual
  double prev = 1e300;
  for (const auto& s : rep["steps"]) {
    CHECK(s["residual"].get<double>() < prev);
    prev = s["residual"].get<double>();
    CHECK(s["krylov_iters"].get<int>() > 0);
  }

  const std::size_t brace = r.out.find('{');
  REQUIRE(brace != std::string::npos);
  CHECK(jeq::json::parse(r.out.substr(brace)) == rep);

  // history.csv: pinned header, one row per step, residuals match the report
  std::istringstream hist(sb.slurp("out_closed/history.csv"));
  std::string line;
  std::getline(hist, line);
  CHECK(line == "# iter,residual");
  int rows = 0;
  while (std::getline(hist, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(line.find(',') != std::string::npos);
  }
  CHECK(rows == int(rep["iterations"].get<int>()));

  // solution field header pins layout and kind
  std::istringstream sol(sb.slurp("out_closed/solution.csv"));
  std::getline(sol, line);
  CHECK(line == "# jeq-field v1, n=2, shape=16,16,16,16, kind=scalar");

  // the estimate report round-trips byte for byte through the library types
  const std::string est_bytes = sb.slurp("out_closed/estimate.json");
  jeq::EstimateReport est = jeq::estimate_from_json(jeq::json::parse(est_bytes));
  CHECK(jeq::json_bytes(jeq::estimate_to_json(est)) == est_bytes);
  CHECK(est.epsilon > 0.3);
  CHECK(est.epsilon < 0.5);

  // reruns with the same config are byte-identical
  sb.write("closed2.cfg",
           std::string(kClosedConfig).replace(std::string(kClosedConfig).find("out_closed"),
                                              10, "out_second"));
  RunResult r2 = sb.run("solve --config closed2.cfg --monitor");
  REQUIRE(r2.code == 0);
  CHECK(sb.slurp("out_second/convergence.json") == sb.slurp("out_closed/convergence.json"));
  CHECK(sb.slurp("out_second/estimate.json") == est_bytes);
  CHECK(sb.slurp("out_second/solution.csv") == sb.slurp("out_closed/solution.csv"));
}

TEST_CASE("monitor subcommand rebuilds the estimate from saved fields") {
  Sandbox sb;
  sb.write("closed.cfg", kClosedConfig);
  REQUIRE(sb.run("solve --config closed.cfg --monitor").code == 0);

  // c = 1 for this problem, so psi = n/c = 2 reproduces the solve's monitor
  sb.write("mon.cfg",
           "n = 2\n"
           "shape = 16,16,16,16\n"
           "topology = periodic\n"
           "chi = 2.0 + ddbar(0.05*sin(2*pi*x1))\n"
           "psi = 2.0\n");
  RunResult r = sb.run("monitor --config mon.cfg --field out_closed/solution.csv");
  REQUIRE(r.code == 0);
  jeq::json mon = jeq::json::parse(r.out);
  jeq::json est = jeq::json::parse(sb.slurp("out_closed/estimate.json"));
  // same solution, psi differing only by |c - 1| <= 1e-10: the headline
  // quantities agree to solver precision
  for (const char* key : {"C0", "grad_max", "lap_max", "epsilon", "theta"}) {
    CAPTURE(key);
    CHECK(std::abs(mon[key].get<double>() - est[key].get<double>()) < 1e-8);
  }

  // monitor without psi is a config error (exit 3) that says what to pass
  sb.write("mon_nopsi.cfg",
           "n = 2\n"
           "shape = 16,16,16,16\n"
           "topology = periodic\n"
           "chi = 2.0 + ddbar(0.05*sin(2*pi*x1))\n");
  RunResult bad = sb.run("monitor --config mon_nopsi.cfg --field out_closed/solution.csv");
  CHECK(bad.code == 3);
  CHECK(bad.out.find("n/c") != std::string::npos);

  // a field whose shape disagrees with the config is rejected at parse time
  sb.write("mon8.cfg",
           "n = 2\n"
           "shape = 8,8,8,8\n"
           "topology = periodic\n"
           "chi = 2.0\n"
           "psi = 1.0\n");
  RunResult mis = sb.run("monitor --config mon8.cfg --field out_closed/solution.csv");
  CHECK(mis.code == 3);
}

TEST_CASE("identities subcommand is deterministic and fast") {
  Sandbox sb;
  RunResult r = sb.run("identities --points 40 --seed 11 --json -");
  REQUIRE(r.code == 0);
  const std::size_t brace = r.out.find('{');
  REQUIRE(brace != std::string::npos);
  jeq::json j = jeq::json::parse(r.out.substr(brace));
  CHECK(j["pass"].get<bool>() == true);
  CHECK(j["points"].get<int>() == 40);
  CHECK(j["seed"].get<int>() == 11);
  CHECK(j["worst_abs"].get<double>() < 1e-10);
  CHECK(j["suites"].size() == 2);  // n = 2 and n = 3

  RunResult r2 = sb.run("identities --points 40 --seed 11 --json -");
  CHECK(r2.out == r.out);  // byte-identical rerun
}

TEST_CASE("convergence subcommand verifies the second-order rate end to end") {
  Sandbox sb;
  sb.write("conv.cfg",
           "n = 2\n"
           "shape = 9,9,9,9\n"
           "topology = box\n"
           "chi = 2.0\n"
           "coarse = 9\n"
           "fine = 17\n"
           "output = out_conv\n");
  RunResult r = sb.run("convergence --config conv.cfg --json -");
  REQUIRE(r.code == 0);
  const std::size_t brace = r.out.find('{');
  REQUIRE(brace != std::string::npos);
  jeq::json j = jeq::json::parse(r.out.substr(brace));
  const double ratio = j["ratio"].get<double>();
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
  CHECK(j["pass"].get<bool>() == true);
  CHECK(fs::exists(sb.path("out_conv/coarse_history.csv")));
  CHECK(fs::exists(sb.path("out_conv/fine_history.csv")));

  // refusal paths: periodic topology and csv chi are resolution-bound
  sb.write("conv_bad.cfg",
           "n = 2\n"
           "shape = 8,8,8,8\n"
           "topology = periodic\n"
           "chi = 2.0\n");
  CHECK(sb.run("convergence --config conv_bad.cfg").code == 3);
}
