#pragma once

// JSON / CSV report emission. All reports use nlohmann's ordered_json so the
// key order is the insertion order below; identical values therefore produce
// byte-identical output, which the CLI relies on (same config + seed => same
// report bytes).

#include <string>
#include <vector>

#include "json.hpp"

#include "jeq/grid.hpp"
#include "jeq/monitor.hpp"
#include "jeq/solver.hpp"

namespace jeq {

using json = nlohmann::ordered_json;

// One record per Newton step: iter, residual, step, margin, krylov_iters.
json steps_to_json(const std::vector<StepRecord>& steps);

// Problem summary + final state + step history; `closed` adds the solved
// right-hand constant c.
json solve_to_json(const Grid& grid, const SolveResult& result, bool closed);

json estimate_to_json(const EstimateReport& r);
EstimateReport estimate_from_json(const json& j);

// Exact bytes emit_json writes: dump with two-space indent plus newline.
std::string json_bytes(const json& j);

// Writes to `path`, or to stdout when path is empty. IoError on failure.
void emit_json(const json& j, const std::string& path);

// Gnuplot-ready two-column convergence history: a '#'-prefixed header line,
// then one "iter,residual" row per Newton step.
void write_history_csv(const std::string& path, const std::vector<StepRecord>& steps);

}  // namespace jeq
