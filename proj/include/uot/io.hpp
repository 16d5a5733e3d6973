#pragma once

#include <string>

#include "uot/solvers.hpp"
#include "uot/types.hpp"

namespace uot {

/// Writes content to path atomically (temp file in the same directory, then
/// rename). Throws std::runtime_error on IO failure.
void atomic_write(const std::string& path, const std::string& content);

/// Problem files: JSON {"a": [...], "b": [...], "C": [[...]], "tau": t}.
UotProblem load_problem_json(const std::string& path);
std::string problem_to_json(const UotProblem& problem);

/// Plans: row-major CSV with a "n=<n>" header line. Values round-trip within
/// 1e-15 relative (serialized with 17 significant digits).
std::string plan_to_csv(const MatrixXd& X);
MatrixXd plan_from_csv_text(const std::string& text);
TransportPlan load_plan_csv(const std::string& path);

/// Trace CSV: header iter,f,g_eta,dual_gap,marginal_gap and one row per
/// recorded iteration.
std::string trace_to_csv(const std::vector<TraceRow>& trace);

/// Report JSON for a solve; includes a "version" field.
std::string solve_report_to_json(const SolveReport& report, const std::string& solver);

}  // namespace uot
