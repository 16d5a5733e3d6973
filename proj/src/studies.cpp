#include <cmath>

#include "uot/dual.hpp"
#include "uot/solvers.hpp"
#include "uot/studies.hpp"

namespace uot {

double entropic_dual_optimum(const UotProblem& problem, double eta, double grad_tol,
                             int max_iters) {
  const Eigen::Index n = problem.n();
  const double tau = problem.tau();
  ReducedDualPoint x;
  x.u = VectorXd::Zero(n);
  x.v = VectorXd::Zero(n);

  ReducedDualValue cur = entropic_dual_h(problem, eta, x);
  double lambda = 0.0;
  for (int it = 0; it < max_iters && cur.grad.norm() > grad_tol; ++it) {
    MatrixXd E(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        E(i, j) = std::exp((x.u[i] + x.v[j] - problem.cost()(i, j)) / eta);
    MatrixXd H = MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
      H(i, i) = E.row(i).sum() / eta + problem.a()[i] * std::exp(-x.u[i] / tau) / tau;
    for (Eigen::Index j = 0; j < n; ++j)
      H(n + j, n + j) = E.col(j).sum() / eta + problem.b()[j] * std::exp(-x.v[j] / tau) / tau;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        H(i, n + j) = E(i, j) / eta;
        H(n + j, i) = E(i, j) / eta;
      }

    VectorXd d;
    while (true) {
      MatrixXd Hd = H;
      if (lambda > 0.0) Hd.diagonal().array() += lambda;
      Eigen::LDLT<MatrixXd> ldlt(Hd);
      d = ldlt.solve(-cur.grad);
      if (ldlt.info() == Eigen::Success && d.allFinite() && cur.grad.dot(d) < 0.0) break;
      lambda = lambda == 0.0 ? 1e-10 : lambda * 10.0;
      if (lambda > 1e10) throw DivergenceError("entropic_dual_optimum: damping exhausted");
    }
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      ReducedDualPoint xc{x.u + step * d.head(n), x.v + step * d.tail(n)};
      try {
        ReducedDualValue vc = entropic_dual_h(problem, eta, xc);
        if (vc.value <= cur.value + 1e-4 * step * cur.grad.dot(d)) {
          x = std::move(xc);
          cur = std::move(vc);
          moved = true;
          break;
        }
      } catch (const DivergenceError&) {
        // overshoot into overflow territory, shorten the step
      }
      step *= 0.5;
    }
    if (!moved) break;
    if (lambda > 0.0) lambda = std::max(0.0, lambda / 100.0);
  }
  return cur.value;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) return std::numeric_limits<double>::quiet_NaN();
  double xm = 0.0, ym = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    xm += x[k];
    ym += y[k];
  }
  xm /= static_cast<double>(m);
  ym /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (x[k] - xm) * (x[k] - xm);
    sxy += (x[k] - xm) * (y[k] - ym);
    syy += (y[k] - ym) * (y[k] - ym);
  }
  if (syy == 0.0 || sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double ss_res = syy - sxy * sxy / sxx;
  return 1.0 - ss_res / syy;
}

ScalingStudy tau_scaling_study(const CostMatrix& cost, const Measure& a, const Measure& b,
                               const std::vector<double>& tau_grid, double epsilon, double eta,
                               int max_iters) {
  if (tau_grid.empty()) throw std::invalid_argument("tau_scaling_study: empty grid");
  ScalingStudy study;
  for (double tau : tau_grid) {
    UotProblem problem(cost, a, b, tau);

    GemConfig config;
    config.epsilon = epsilon;
    config.eta = eta;
    config.gap_tol = epsilon;
    config.max_iters = max_iters;
    auto [gem_plan, gem_report] = gem_uot(problem, config);
    (void)gem_plan;

    double target = entropic_dual_optimum(problem, eta);
    auto [sink_plan, sink_report] = sinkhorn_uot(problem, eta, epsilon, max_iters, target);
    (void)sink_plan;

    study.rows.push_back({tau, gem_report.iterations, sink_report.iterations,
                          gem_report.stop_reason != StopReason::gap_tol,
                          sink_report.stop_reason != StopReason::gap_tol});
  }

  std::vector<double> gem_tau, gem_log_tau, gem_iters;
  std::vector<double> sink_tau, sink_log_tau, sink_iters;
  for (const ScalingRow& row : study.rows) {
    if (!row.gem_censored) {
      gem_tau.push_back(row.tau);
      gem_log_tau.push_back(std::log(row.tau));
      gem_iters.push_back(static_cast<double>(row.gem_iterations));
    }
    if (!row.sinkhorn_censored) {
      sink_tau.push_back(row.tau);
      sink_log_tau.push_back(std::log(row.tau));
      sink_iters.push_back(static_cast<double>(row.sinkhorn_iterations));
    }
  }
  study.fit.gem_log_r2 = linear_fit_r2(gem_log_tau, gem_iters);
  study.fit.gem_linear_r2 = linear_fit_r2(gem_tau, gem_iters);
  study.fit.sinkhorn_log_r2 = linear_fit_r2(sink_log_tau, sink_iters);
  study.fit.sinkhorn_linear_r2 = linear_fit_r2(sink_tau, sink_iters);
  return study;
}

}  // namespace uot
