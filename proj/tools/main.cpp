#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "uot/color.hpp"
#include "uot/io.hpp"
#include "uot/lp.hpp"
#include "uot/objectives.hpp"
#include "uot/reference.hpp"
#include "uot/rounding.hpp"
#include "uot/solvers.hpp"
#include "uot/studies.hpp"
#include "uot/synthetic.hpp"

namespace {

const char* kVersion = "1.0.0";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_taus(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  if (out.empty()) throw std::invalid_argument("empty tau list");
  return out;
}

std::string bound_reports_to_csv(const std::vector<uot::BoundReport>& reports) {
  std::ostringstream out;
  out << "tau,empirical,bound,satisfied\n";
  for (const auto& r : reports)
    out << fmt(r.tau) << "," << fmt(r.empirical_gap) << "," << fmt(r.theoretical_bound) << ","
        << (r.satisfied ? 1 : 0) << "\n";
  return out.str();
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty())
    std::cout << content;
  else
    uot::atomic_write(path, content);
}

struct SolveFlags {
  std::string problem_path;
  std::string solver = "gem-uot";
  double epsilon = 1e-3;
  double eta = 0.0;  // 0 = auto
  int max_iters = 100000;
  double gap_tol = 0.0;  // 0 = auto
  std::string trace_path;
  std::string plan_path;
  std::string report_path;
};

int run_solve(const SolveFlags& f) {
  uot::UotProblem problem = uot::load_problem_json(f.problem_path);
  if (auto warning = problem.tau_regularity_warning()) std::cerr << "warning: " << *warning << "\n";

  uot::GemConfig config;
  config.epsilon = f.epsilon;
  config.eta = f.eta;
  config.max_iters = f.max_iters;
  config.gap_tol = f.gap_tol;
  config.record_trace = !f.trace_path.empty();

  uot::SolveReport report;
  uot::MatrixXd plan;
  if (f.solver == "gem-uot") {
    auto [p, r] = uot::gem_uot(problem, config);
    plan = p.entries();
    report = std::move(r);
  } else if (f.solver == "gem-ruot") {
    auto result = uot::gem_ruot(problem, config);
    plan = result.plan.entries();
    report = std::move(result.report);
  } else if (f.solver == "sinkhorn") {
    double eta = f.eta > 0.0 ? f.eta : 0.01;
    auto [p, r] = uot::sinkhorn_uot(problem, eta, f.epsilon, f.max_iters);
    plan = p.entries();
    report = std::move(r);
  } else {
    throw std::invalid_argument("unknown solver: " + f.solver);
  }

  if (!f.plan_path.empty()) uot::atomic_write(f.plan_path, uot::plan_to_csv(plan));
  if (!f.trace_path.empty()) uot::atomic_write(f.trace_path, uot::trace_to_csv(report.trace));
  emit(f.report_path, uot::solve_report_to_json(report, f.solver));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("UOTKIT_THREADS")) {
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  }

  CLI::App app{"Unbalanced optimal transport toolkit"};
  app.require_subcommand(1);

  // solve
  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "Solve a UOT problem from a JSON file");
  solve->add_option("--problem", sf.problem_path, "problem JSON path")->required();
  solve->add_option("--solver", sf.solver, "gem-uot | gem-ruot | sinkhorn");
  solve->add_option("--epsilon", sf.epsilon, "target primal error");
  solve->add_option("--eta", sf.eta, "regularization weight (0 = auto)");
  solve->add_option("--max-iters", sf.max_iters, "iteration cap");
  solve->add_option("--gap-tol", sf.gap_tol, "duality-gap stop (0 = auto)");
  solve->add_option("--trace", sf.trace_path, "per-iteration trace CSV path");
  solve->add_option("--plan", sf.plan_path, "output plan CSV path");
  solve->add_option("--report", sf.report_path, "output report JSON path (default stdout)");

  // retrieve-ot
  std::string ro_problem, ro_plan, ro_report;
  double ro_epsilon = 0.05;
  auto* retrieve = app.add_subcommand("retrieve-ot", "Recover a standard OT plan by rounding");
  retrieve->add_option("--problem", ro_problem, "problem JSON (tau field ignored)")->required();
  retrieve->add_option("--epsilon", ro_epsilon, "OT suboptimality target");
  retrieve->add_option("--plan", ro_plan, "output plan CSV path");
  retrieve->add_option("--report", ro_report, "output report JSON path (default stdout)");

  // bound checks and studies share the generator flags
  struct StudyFlags {
    Eigen::Index n = 5;
    std::string taus = "10,100,1000,10000";
    std::uint64_t seed = 1;
    double epsilon = 1e-2;
    double eta = 0.1;
    std::string out;
    std::string fit_report;
  };
  StudyFlags t2, t4, ts;
  auto* thm2 = app.add_subcommand("check-thm2", "Marginal-gap bound study");
  thm2->add_option("--n", t2.n);
  thm2->add_option("--taus", t2.taus);
  thm2->add_option("--seed", t2.seed);
  thm2->add_option("--out", t2.out, "CSV output path (default stdout)");
  auto* thm4 = app.add_subcommand("check-thm4", "OT-vs-UOT distance bound study");
  thm4->add_option("--n", t4.n);
  thm4->add_option("--taus", t4.taus);
  thm4->add_option("--seed", t4.seed);
  thm4->add_option("--out", t4.out, "CSV output path (default stdout)");
  auto* study = app.add_subcommand("tau-study", "Iteration scaling in tau");
  study->add_option("--n", ts.n);
  study->add_option("--taus", ts.taus);
  study->add_option("--seed", ts.seed);
  study->add_option("--epsilon", ts.epsilon);
  study->add_option("--eta", ts.eta, "shared regularization weight");
  study->add_option("--out", ts.out, "CSV output path (default stdout)");
  study->add_option("--fit-report", ts.fit_report, "fit summary JSON path");

  // color-transfer
  std::string ct_src, ct_dst, ct_out, ct_report, ct_solver = "gem-uot";
  Eigen::Index ct_n = 64;
  double ct_tau = 0.0, ct_epsilon = 1e-3;
  std::uint64_t ct_seed = 1;
  auto* ct = app.add_subcommand("color-transfer", "Palette transfer between two PPM images");
  ct->add_option("--src", ct_src, "source PPM (P6)")->required();
  ct->add_option("--dst", ct_dst, "target PPM (P6)")->required();
  ct->add_option("--n", ct_n, "palette size");
  ct->add_option("--solver", ct_solver, "gem-uot | sinkhorn");
  ct->add_option("--tau", ct_tau, "penalty weight (0 = 10*||C||inf)");
  ct->add_option("--epsilon", ct_epsilon);
  ct->add_option("--seed", ct_seed);
  ct->add_option("--out", ct_out, "recolored PPM path")->required();
  ct->add_option("--report", ct_report, "sparsity report JSON path (default stdout)");

  // sparsity comparison
  Eigen::Index sp_n = 10;
  std::uint64_t sp_seed = 1;
  double sp_threshold = 1e-10, sp_epsilon = 1e-2;
  std::string sp_report;
  auto* sp = app.add_subcommand("sparsity", "Plan sparsity of both solvers on a synthetic instance");
  sp->add_option("--n", sp_n);
  sp->add_option("--seed", sp_seed);
  sp->add_option("--threshold", sp_threshold);
  sp->add_option("--epsilon", sp_epsilon);
  sp->add_option("--report", sp_report, "JSON output path (default stdout)");

  // gen
  uot::ExperimentConfig gen_config;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic problem JSON");
  gen->add_option("--n", gen_config.n);
  gen->add_option("--seed", gen_config.seed);
  gen->add_option("--alpha", gen_config.alpha);
  gen->add_option("--beta", gen_config.beta);
  gen->add_option("--tau", gen_config.tau);
  gen->add_option("--out", gen_out, "problem JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return run_solve(sf);

    if (retrieve->parsed()) {
      uot::UotProblem problem = uot::load_problem_json(ro_problem);
      auto [plan, report] = uot::gem_ot(problem.cost(), problem.a(), problem.b(), ro_epsilon);
      if (!ro_plan.empty()) uot::atomic_write(ro_plan, uot::plan_to_csv(plan.entries()));
      nlohmann::json j;
      j["version"] = kVersion;
      j["ot_gap_bound"] = report.ot_gap_bound;
      j["tau_used"] = report.tau_used;
      j["eta_used"] = report.eta_used;
      j["objective"] = report.objective;
      j["inner_stop_reason"] = report.inner.stop_reason == uot::StopReason::gap_tol
                                   ? "gap_tol"
                                   : (report.inner.stop_reason == uot::StopReason::iter_budget
                                          ? "iter_budget"
                                          : "max_iters");
      emit(ro_report, j.dump(2) + "\n");
      return 0;
    }

    if (thm2->parsed() || thm4->parsed()) {
      const StudyFlags& f = thm2->parsed() ? t2 : t4;
      uot::ExperimentConfig config;
      config.n = f.n;
      config.seed = f.seed;
      uot::UotProblem base = uot::generate_synthetic_normalized(config);
      auto reports = thm2->parsed()
                         ? uot::theorem2_check(base.cost(), base.a(), base.b(), parse_taus(f.taus))
                         : uot::theorem4_check(base.cost(), base.a(), base.b(), parse_taus(f.taus));
      emit(f.out, bound_reports_to_csv(reports));
      bool all = true;
      for (const auto& r : reports) all = all && r.satisfied;
      return all ? 0 : 1;
    }

    if (study->parsed()) {
      uot::ExperimentConfig config;
      config.n = ts.n;
      config.seed = ts.seed;
      uot::UotProblem base = uot::generate_synthetic(config);
      uot::ScalingStudy result = uot::tau_scaling_study(base.cost(), base.a(), base.b(),
                                                        parse_taus(ts.taus), ts.epsilon, ts.eta);
      std::ostringstream csv;
      csv << "tau,gem_iterations,sinkhorn_iterations,gem_censored,sinkhorn_censored\n";
      for (const auto& row : result.rows)
        csv << fmt(row.tau) << "," << row.gem_iterations << "," << row.sinkhorn_iterations << ","
            << (row.gem_censored ? 1 : 0) << "," << (row.sinkhorn_censored ? 1 : 0) << "\n";
      emit(ts.out, csv.str());
      if (!ts.fit_report.empty()) {
        nlohmann::json j;
        j["version"] = kVersion;
        j["gem_log_r2"] = result.fit.gem_log_r2;
        j["gem_linear_r2"] = result.fit.gem_linear_r2;
        j["sinkhorn_log_r2"] = result.fit.sinkhorn_log_r2;
        j["sinkhorn_linear_r2"] = result.fit.sinkhorn_linear_r2;
        uot::atomic_write(ts.fit_report, j.dump(2) + "\n");
      }
      return 0;
    }

    if (ct->parsed()) {
      uot::Image src = uot::load_ppm(ct_src);
      uot::Image dst = uot::load_ppm(ct_dst);
      uot::ColorSolver solver = ct_solver == "sinkhorn" ? uot::ColorSolver::sinkhorn_solver
                                                        : uot::ColorSolver::gem_uot_solver;
      if (ct_solver != "sinkhorn" && ct_solver != "gem-uot")
        throw std::invalid_argument("unknown solver: " + ct_solver);
      auto result = uot::color_transfer(src, dst, ct_n, solver, ct_tau, ct_epsilon, 0.01, ct_seed);
      uot::atomic_write(ct_out, uot::ppm_to_bytes(result.output));
      nlohmann::json j;
      j["version"] = kVersion;
      j["solver"] = ct_solver;
      j["n"] = static_cast<long>(ct_n);
      j["plan_sparsity"] = result.plan_sparsity;
      j["iterations"] = result.report.iterations;
      emit(ct_report, j.dump(2) + "\n");
      return 0;
    }

    if (sp->parsed()) {
      uot::ExperimentConfig config;
      config.n = sp_n;
      config.seed = sp_seed;
      uot::UotProblem problem = uot::generate_synthetic(config);
      uot::GemConfig gc;
      gc.epsilon = sp_epsilon;
      auto [gem_plan, gem_report] = uot::gem_uot(problem, gc);
      auto [sink_plan, sink_report] = uot::sinkhorn_uot(problem, 0.01, sp_epsilon, 100000);
      nlohmann::json j;
      j["version"] = kVersion;
      j["threshold"] = sp_threshold;
      j["gem_sparsity"] = uot::sparsity_ratio(gem_plan, sp_threshold);
      j["sinkhorn_sparsity"] = uot::sparsity_ratio(sink_plan, sp_threshold);
      j["sinkhorn_sparsity_at_zero"] = uot::sparsity_ratio(sink_plan, 0.0);
      emit(sp_report, j.dump(2) + "\n");
      return 0;
    }

    if (gen->parsed()) {
      emit(gen_out, uot::problem_to_json(uot::generate_synthetic(gen_config)));
      return 0;
    }
  } catch (const uot::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
