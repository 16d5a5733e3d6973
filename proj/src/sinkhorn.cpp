#include <chrono>
#include <cmath>

#include "uot/objectives.hpp"
#include "uot/solvers.hpp"

namespace uot {

namespace {

double logsumexp_row(const Eigen::ArrayXd& s) {
  double m = s.maxCoeff();
  return m + std::log((s - m).exp().sum());
}

}  // namespace

std::pair<TransportPlan, SolveReport> sinkhorn_uot(const UotProblem& problem, double eta,
                                                   double epsilon, int max_iters,
                                                   std::optional<double> dual_target) {
  if (!(eta > 0.0)) throw std::invalid_argument("sinkhorn_uot: eta must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn_uot: epsilon must be > 0");
  if (max_iters < 1) throw std::invalid_argument("sinkhorn_uot: max_iters must be >= 1");
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index n = problem.n();
  const double tau = problem.tau();
  const double damp = eta * tau / (eta + tau);  // exact coordinate minimizer scale
  const double decrease_tol = epsilon * 1e-3;

  ReducedDualPoint x;
  x.u = VectorXd::Zero(n);
  x.v = VectorXd::Zero(n);

  SolveReport report;
  report.eta_used = eta;
  report.stop_reason = StopReason::max_iters;
  double prev_val = entropic_dual_h(problem, eta, x).value;

  for (int it = 1; it <= max_iters; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::ArrayXd s =
          (x.v.array() - problem.cost().entries().row(i).transpose().array()) / eta;
      x.u[i] = damp * (std::log(problem.a()[i]) - logsumexp_row(s));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::ArrayXd s = (x.u.array() - problem.cost().entries().col(j).array()) / eta;
      x.v[j] = damp * (std::log(problem.b()[j]) - logsumexp_row(s));
    }
    if (!x.u.allFinite() || !x.v.allFinite())
      throw DivergenceError("sinkhorn_uot: non-finite potentials");

    double val = entropic_dual_h(problem, eta, x).value;
    report.duality_gap_trace.push_back(dual_target ? val - *dual_target : val);
    report.iterations = it;
    if (dual_target) {
      if (val - *dual_target <= epsilon) {
        report.stop_reason = StopReason::gap_tol;
        break;
      }
    } else if (prev_val - val < decrease_tol) {
      report.stop_reason = StopReason::gap_tol;
      break;
    }
    prev_val = val;
  }

  MatrixXd X(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      X(i, j) = std::exp((x.u[i] + x.v[j] - problem.cost()(i, j)) / eta);
  if (!X.allFinite()) throw DivergenceError("sinkhorn_uot: plan overflow");
  TransportPlan plan(std::move(X));
  report.final_objective = uot_objective(problem, plan);
  // entropic objective; entries that underflowed to zero contribute 0 (limit)
  report.final_reg_objective = plan.entries().minCoeff() > 0.0
                                   ? entropic_objective(problem, eta, plan)
                                   : report.final_objective;
  report.marginal_gap = marginal_gap(plan, problem.a(), problem.b());
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(plan), std::move(report)};
}

}  // namespace uot
