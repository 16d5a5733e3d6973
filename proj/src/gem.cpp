#include <chrono>
#include <cmath>

#include "uot/objectives.hpp"
#include "uot/solvers.hpp"

namespace uot {

namespace {

double resolve_eta(const GemConfig& config, const UotProblem& problem) {
  if (config.eta > 0.0) return config.eta;
  double q = problem.a().total() + problem.b().total();
  return config.epsilon / (2.0 * (q * q / 4.0));
}

DualPoint initial_dual_point(const UotProblem& problem, const BoxV& box) {
  const Eigen::Index n = problem.n();
  DualPoint x;
  x.u = VectorXd::Zero(n).cwiseMax(box.u_lo).cwiseMin(box.upper);
  x.v = VectorXd::Zero(n).cwiseMax(box.v_lo).cwiseMin(box.upper);
  x.t.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      x.t(i, j) = std::max(0.0, x.u[i] + x.v[j] - problem.cost()(i, j));
  return x;
}

}  // namespace

double delta_bound_surrogate(const UotProblem& problem, double eta,
                             const DerivedConstants& constants) {
  // initial dual value tau(alpha+beta), gradient norm ||a||^2+||b||^2 at zero,
  // and the box diameter D bounding the optimizer's potentials
  const double n = static_cast<double>(problem.n());
  const double grad0_sq =
      problem.a().weights().squaredNorm() + problem.b().weights().squaredNorm();
  return 2.0 * n * constants.c0 * constants.D * constants.D + eta * constants.R +
         problem.tau() * constants.q + grad0_sq / constants.mu;
}

long iteration_budget(const DerivedConstants& constants, const UotProblem& problem, double eta,
                      double epsilon, double delta_bound) {
  if (!(delta_bound > 0.0)) throw std::invalid_argument("iteration_budget: delta_bound <= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("iteration_budget: epsilon <= 0");
  const double n = static_cast<double>(problem.n());
  const double m = std::min(constants.a_min, constants.b_min);
  double inner = std::max({constants.L1 / epsilon,
                           std::exp(constants.D / problem.tau()) / m, 1.0 / constants.q});
  double log_arg = (4.0 * n * n * std::sqrt(delta_bound) / eta) * inner;
  if (!(log_arg > 0.0) || !std::isfinite(log_arg))
    throw std::invalid_argument("iteration_budget: nonpositive or non-finite log argument");
  double k = 4.0 * (1.0 + std::sqrt(1.0 + 16.0 * constants.L / constants.mu)) * std::log(log_arg);
  if (!std::isfinite(k)) throw std::invalid_argument("iteration_budget: non-finite budget");
  return std::max(1L, static_cast<long>(std::ceil(k)));
}

std::pair<TransportPlan, SolveReport> gem_uot(const UotProblem& problem,
                                              const GemConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index n = problem.n();
  const double eta = resolve_eta(config, problem);
  const double gap_tol = config.gap_tol > 0.0 ? config.gap_tol : config.epsilon / 2.0;
  const double inner_tol =
      config.inner_tol > 0.0 ? config.inner_tol : std::min(1e-9, config.epsilon * 1e-4);

  DerivedConstants constants = derived_constants(problem, eta);
  BoxV box = make_box(problem, constants);
  long budget = iteration_budget(constants, problem, eta, config.epsilon,
                                 delta_bound_surrogate(problem, eta, constants));
  long iter_cap = std::min<long>(budget, config.max_iters);

  const double accel = 1.0 + std::sqrt(1.0 + 16.0 * constants.L / constants.mu);
  const double alpha = 1.0 - 1.0 / accel;
  const double psi = 1.0 / (1.0 - alpha) - 1.0;
  const double rho = alpha * constants.mu / (1.0 - alpha);

  DualPoint x = initial_dual_point(problem, box);
  DualPoint x_under = x;  // recursion iterate feeding the gradient
  VectorXd y = dual_objective_heta(problem, eta, x_under, constants).grad_f;
  VectorXd y_prev = y;

  // theta-weighted running averages (theta_t proportional to alpha^{-t})
  DualPoint x_bar = x;
  double weight_denom = 0.0;  // s_t = 1 + alpha * s_{t-1}, s_1 = 1

  SolveReport report;
  report.eta_used = eta;
  report.stop_reason = (iter_cap == budget && budget <= config.max_iters)
                           ? StopReason::iter_budget
                           : StopReason::max_iters;
  double best_gap = std::numeric_limits<double>::infinity();

  for (long t = 1; t <= iter_cap; ++t) {
    VectorXd y_tilde = y + alpha * (y - y_prev);
    ProxResult pr = prox_map(y_tilde, x, rho, box, problem, eta, constants, inner_tol,
                             config.inner_max_iters);
    if (!pr.exact) report.inner_inexact = true;
    x = std::move(pr.x);

    if (!x.u.allFinite() || !x.v.allFinite() || !x.t.allFinite())
      throw DivergenceError("gem_uot: non-finite iterate");
    if (!is_feasible_dual(problem, x, 1e-9))
      throw DivergenceError("gem_uot: iterate left the dual feasible set");

    x_under.u = (x.u + psi * x_under.u) / (1.0 + psi);
    x_under.v = (x.v + psi * x_under.v) / (1.0 + psi);
    x_under.t = (x.t + psi * x_under.t) / (1.0 + psi);
    y_prev = std::move(y);
    y = dual_objective_heta(problem, eta, x_under, constants).grad_f;

    weight_denom = 1.0 + alpha * weight_denom;
    const double w = 1.0 / weight_denom;
    if (t == 1) {
      x_bar = x;
    } else {
      x_bar.u += w * (x.u - x_bar.u);
      x_bar.v += w * (x.v - x_bar.v);
      x_bar.t += w * (x.t - x_bar.t);
    }

    TransportPlan plan(x_bar.t / (2.0 * eta));
    double gap = duality_gap(problem, eta, plan, x_bar);
    best_gap = std::min(best_gap, gap);
    if (config.record_trace) {
      report.duality_gap_trace.push_back(best_gap);
      report.trace.push_back({static_cast<int>(t), uot_objective(problem, plan),
                              reg_objective(problem, eta, plan), best_gap,
                              marginal_gap(plan, problem.a(), problem.b())});
    }
    report.iterations = static_cast<int>(t);
    if (best_gap <= gap_tol) {
      report.stop_reason = StopReason::gap_tol;
      break;
    }
  }

  TransportPlan plan(x_bar.t / (2.0 * eta));
  report.final_objective = uot_objective(problem, plan);
  report.final_reg_objective = reg_objective(problem, eta, plan);
  report.final_duality_gap = duality_gap(problem, eta, plan, x_bar);
  report.marginal_gap = marginal_gap(plan, problem.a(), problem.b());
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(plan), std::move(report)};
}

ReducedDualPoint box_project(const ReducedDualPoint& x, const BoxV& box) {
  ReducedDualPoint out;
  out.u = x.u.cwiseMax(box.u_lo).cwiseMin(box.upper);
  out.v = x.v.cwiseMax(box.v_lo).cwiseMin(box.upper);
  return out;
}

RuotResult gem_ruot(const UotProblem& problem, const GemConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index n = problem.n();
  const double eta = resolve_eta(config, problem);
  const double gap_tol = config.gap_tol > 0.0 ? config.gap_tol : config.epsilon / 2.0;

  DerivedConstants constants = derived_constants(problem, eta);
  BoxV box = make_box(problem, constants);
  long budget = std::max(
      1L, static_cast<long>(std::ceil(std::sqrt(
              12.0 * constants.L_a * static_cast<double>(n) * constants.D * constants.D /
              config.epsilon))));
  long iter_cap = std::min<long>(budget, config.max_iters);

  ReducedDualPoint x;
  x.u = VectorXd::Zero(n).cwiseMax(box.u_lo).cwiseMin(box.upper);
  x.v = VectorXd::Zero(n).cwiseMax(box.v_lo).cwiseMin(box.upper);
  ReducedDualPoint x_under = x;
  VectorXd y = relaxed_dual_ha(problem, eta, x_under).grad;
  VectorXd y_prev = y;

  ReducedDualPoint x_bar = x;

  SolveReport report;
  report.eta_used = eta;
  report.stop_reason = (iter_cap == budget && budget <= config.max_iters)
                           ? StopReason::iter_budget
                           : StopReason::max_iters;
  double best_gap = std::numeric_limits<double>::infinity();

  for (long t = 1; t <= iter_cap; ++t) {
    const double alpha_t = static_cast<double>(t - 1) / static_cast<double>(t);
    const double psi_t = static_cast<double>(t - 1) / 2.0;
    const double rho_t = 6.0 * constants.L_a / static_cast<double>(t);

    VectorXd y_tilde = y + alpha_t * (y - y_prev);
    ReducedDualPoint step;
    step.u = x.u - y_tilde.head(n) / rho_t;
    step.v = x.v - y_tilde.tail(n) / rho_t;
    x = box_project(step, box);
    if (!x.u.allFinite() || !x.v.allFinite())
      throw DivergenceError("gem_ruot: non-finite iterate");

    x_under.u = (x.u + psi_t * x_under.u) / (1.0 + psi_t);
    x_under.v = (x.v + psi_t * x_under.v) / (1.0 + psi_t);
    y_prev = std::move(y);
    y = relaxed_dual_ha(problem, eta, x_under).grad;

    // theta_t proportional to t, so the running weight is 2/(t+1)
    const double w = 2.0 / static_cast<double>(t + 1);
    x_bar.u += w * (x.u - x_bar.u);
    x_bar.v += w * (x.v - x_bar.v);

    TransportPlan plan = recover_plan(problem, eta, x_bar);
    double f_a = problem.tau() * constants.q - relaxed_dual_ha(problem, eta, x_bar).value;
    double gap = reg_objective(problem, eta, plan) - f_a;
    best_gap = std::min(best_gap, gap);
    if (config.record_trace) {
      report.duality_gap_trace.push_back(best_gap);
      report.trace.push_back({static_cast<int>(t), uot_objective(problem, plan),
                              reg_objective(problem, eta, plan), best_gap,
                              marginal_gap(plan, problem.a(), problem.b())});
    }
    report.iterations = static_cast<int>(t);
    if (best_gap <= gap_tol) {
      report.stop_reason = StopReason::gap_tol;
      break;
    }
  }

  RuotResult out{problem.tau() * constants.q - relaxed_dual_ha(problem, eta, x_bar).value,
                 recover_plan(problem, eta, x_bar), std::move(report)};
  out.report.final_objective = uot_objective(problem, out.plan);
  out.report.final_reg_objective = reg_objective(problem, eta, out.plan);
  out.report.final_duality_gap = out.report.final_reg_objective - out.value;
  out.report.marginal_gap = marginal_gap(out.plan, problem.a(), problem.b());
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace uot
