#include "jeq/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace jeq {

json steps_to_json(const std::vector<StepRecord>& steps) {
  json arr = json::array();
  for (const StepRecord& s : steps) {
    json rec;
    rec["iter"] = s.iter;
    rec["residual"] = s.residual_norm;
    rec["step"] = s.step_length;
    rec["margin"] = s.positivity_margin;
    rec["krylov_iters"] = s.krylov_iters;
    arr.push_back(std::move(rec));
  }
  return arr;
}

json solve_to_json(const Grid& grid, const SolveResult& result, bool closed) {
  json j;
  json problem;
  problem["n"] = grid.n();
  problem["topology"] = topology_name(grid.topology());
  problem["shape"] = grid.shape();
  j["problem"] = std::move(problem);
  j["iterations"] = int(result.state.step_history.size());
  j["residual_norm"] = result.state.residual_norm;
  j["positivity_margin"] = result.state.positivity_margin;
  if (closed) j["c"] = result.state.c;
  j["osc"] = result.diag.osc;
  j["grad_max"] = result.diag.grad_max;
  j["lap_max"] = result.diag.lap_max;
  j["boundary_grad_max"] = result.diag.boundary_grad_max;
  j["boundary_lap_max"] = result.diag.boundary_lap_max;
  j["steps"] = steps_to_json(result.state.step_history);
  return j;
}

json estimate_to_json(const EstimateReport& r) {
  json j;
  j["C0"] = r.C0;
  j["grad_max"] = r.grad_max;
  j["lap_max"] = r.lap_max;
  j["boundary_grad_max"] = r.boundary_grad_max;
  j["boundary_lap_max"] = r.boundary_lap_max;
  j["residual_norm"] = r.residual_norm;
  j["epsilon"] = r.epsilon;
  j["psi_min"] = r.psi_min;
  j["psi_max"] = r.psi_max;
  j["theta"] = r.theta;
  j["bigN"] = r.bigN;
  j["A_grad"] = r.A_grad;
  j["A_hess"] = r.A_hess;
  j["testfn_grad_max"] = r.testfn_grad_max;
  j["testfn_grad_max_location"] = r.testfn_grad_max_location;
  j["testfn_hess_max"] = r.testfn_hess_max;
  j["testfn_hess_max_location"] = r.testfn_hess_max_location;
  j["lemma_margin_min"] = r.lemma_margin_min;
  j["lemma_points"] = r.lemma_points;
  return j;
}

EstimateReport estimate_from_json(const json& j) {
  EstimateReport r;
  try {
    r.C0 = j.at("C0").get<double>();
    r.grad_max = j.at("grad_max").get<double>();
    r.lap_max = j.at("lap_max").get<double>();
    r.boundary_grad_max = j.at("boundary_grad_max").get<double>();
    r.boundary_lap_max = j.at("boundary_lap_max").get<double>();
    r.residual_norm = j.at("residual_norm").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.psi_min = j.at("psi_min").get<double>();
    r.psi_max = j.at("psi_max").get<double>();
    r.theta = j.at("theta").get<double>();
    r.bigN = j.at("bigN").get<double>();
    r.A_grad = j.at("A_grad").get<double>();
    r.A_hess = j.at("A_hess").get<double>();
    r.testfn_grad_max = j.at("testfn_grad_max").get<double>();
    r.testfn_grad_max_location = j.at("testfn_grad_max_location").get<std::vector<int>>();
    r.testfn_hess_max = j.at("testfn_hess_max").get<double>();
    r.testfn_hess_max_location = j.at("testfn_hess_max_location").get<std::vector<int>>();
    r.lemma_margin_min = j.at("lemma_margin_min").get<double>();
    r.lemma_points = j.at("lemma_points").get<long>();
  } catch (const json::exception& e) {
    fail(errc::parse_error, std::string("estimate report: ") + e.what());
  }
  return r;
}

std::string json_bytes(const json& j) { return j.dump(2) + "\n"; }

void emit_json(const json& j, const std::string& path) {
  std::string bytes = json_bytes(j);
  if (path.empty()) {
    std::cout << bytes;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write report '" + path + "'");
  out << bytes;
  if (!out) fail(errc::io_error, "short write for report '" + path + "'");
}

void write_history_csv(const std::string& path, const std::vector<StepRecord>& steps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io_error, "cannot write history '" + path + "'");
  out << "# iter,residual\n";
  char buf[64];
  for (const StepRecord& s : steps) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", s.iter, s.residual_norm);
    out << buf;
  }
  if (!out) fail(errc::io_error, "short write for history '" + path + "'");
}

}  // namespace jeq
