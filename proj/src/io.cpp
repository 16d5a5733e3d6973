#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "uot/io.hpp"

namespace uot {

namespace {

const char* kVersion = "1.0.0";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::gap_tol: return "gap_tol";
    case StopReason::iter_budget: return "iter_budget";
    case StopReason::max_iters: return "max_iters";
  }
  return "unknown";
}

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw std::runtime_error("atomic_write: rename failed: " + ec.message());
}

UotProblem load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_problem_json: cannot open " + path);
  nlohmann::json j;
  in >> j;
  auto av = j.at("a").get<std::vector<double>>();
  auto bv = j.at("b").get<std::vector<double>>();
  auto cv = j.at("C").get<std::vector<std::vector<double>>>();
  double tau = j.at("tau").get<double>();
  const auto n = static_cast<Eigen::Index>(av.size());
  MatrixXd C(n, n);
  if (static_cast<Eigen::Index>(cv.size()) != n)
    throw std::runtime_error("load_problem_json: C row count mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(cv[i].size()) != n)
      throw std::runtime_error("load_problem_json: C column count mismatch");
    for (Eigen::Index jx = 0; jx < n; ++jx) C(i, jx) = cv[i][jx];
  }
  return UotProblem(CostMatrix(std::move(C)),
                    Measure(Eigen::Map<VectorXd>(av.data(), n)),
                    Measure(Eigen::Map<VectorXd>(bv.data(), n)), tau);
}

std::string problem_to_json(const UotProblem& problem) {
  nlohmann::json j;
  const auto& a = problem.a().weights();
  const auto& b = problem.b().weights();
  j["a"] = std::vector<double>(a.data(), a.data() + a.size());
  j["b"] = std::vector<double>(b.data(), b.data() + b.size());
  std::vector<std::vector<double>> cv;
  for (Eigen::Index i = 0; i < problem.n(); ++i)
    cv.emplace_back(problem.cost().entries().row(i).begin(),
                    problem.cost().entries().row(i).end());
  j["C"] = cv;
  j["tau"] = problem.tau();
  return j.dump(2) + "\n";
}

std::string plan_to_csv(const MatrixXd& X) {
  std::ostringstream out;
  out << "n=" << X.rows() << "\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (j) out << ",";
      out << fmt(X(i, j));
    }
    out << "\n";
  }
  return out.str();
}

MatrixXd plan_from_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
    throw std::runtime_error("plan_from_csv_text: missing n= header");
  const Eigen::Index n = std::stol(line.substr(2));
  MatrixXd X(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("plan_from_csv_text: truncated");
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ','))
        throw std::runtime_error("plan_from_csv_text: short row");
      X(i, j) = std::stod(cell);
    }
  }
  return X;
}

TransportPlan load_plan_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_plan_csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return TransportPlan(plan_from_csv_text(buf.str()));
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream out;
  out << "iter,f,g_eta,dual_gap,marginal_gap\n";
  for (const TraceRow& row : trace)
    out << row.iter << "," << fmt(row.f) << "," << fmt(row.g_eta) << "," << fmt(row.dual_gap)
        << "," << fmt(row.marginal_gap) << "\n";
  return out.str();
}

std::string solve_report_to_json(const SolveReport& report, const std::string& solver) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["solver"] = solver;
  j["iterations"] = report.iterations;
  j["final_objective"] = report.final_objective;
  j["final_reg_objective"] = report.final_reg_objective;
  j["final_duality_gap"] = report.final_duality_gap;
  j["marginal_gap"] = report.marginal_gap;
  j["wall_time"] = report.wall_time;
  j["eta_used"] = report.eta_used;
  j["stop_reason"] = stop_reason_name(report.stop_reason);
  j["inner_inexact"] = report.inner_inexact;
  return j.dump(2) + "\n";
}

}  // namespace uot
