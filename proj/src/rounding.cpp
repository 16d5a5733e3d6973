#include <cmath>

#include "uot/objectives.hpp"
#include "uot/rounding.hpp"

namespace uot {

FeasiblePlan proj_polytope(const TransportPlan& X, const Measure& a, const Measure& b) {
  const Eigen::Index n = X.n();
  if (n != a.size() || n != b.size())
    throw std::invalid_argument("proj_polytope: dimension mismatch");
  double rel = std::abs(a.total() - b.total()) / std::max(a.total(), b.total());
  if (rel > 1e-12)
    throw std::invalid_argument("proj_polytope: measure totals differ (relative " +
                                std::to_string(rel) + ")");

  MatrixXd Y = X.entries();
  VectorXd row = Y.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    double scale = row[i] > 0.0 ? std::min(a[i] / row[i], 1.0) : 1.0;
    Y.row(i) *= scale;
  }
  VectorXd col = Y.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    double scale = col[j] > 0.0 ? std::min(b[j] / col[j], 1.0) : 1.0;
    Y.col(j) *= scale;
  }
  VectorXd err_r = a.weights() - Y.rowwise().sum();
  VectorXd err_c = b.weights() - Y.colwise().sum().transpose();
  double norm_r = err_r.lpNorm<1>();
  if (norm_r > 0.0) Y += err_r * err_c.transpose() / norm_r;
  // clip the tiny negatives floating-point cancellation can leave behind
  Y = Y.cwiseMax(0.0);
  return FeasiblePlan(std::move(Y), a, b);
}

std::pair<FeasiblePlan, GemOtReport> gem_ot(const CostMatrix& cost, const Measure& a,
                                            const Measure& b, double epsilon, int max_iters) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("gem_ot: epsilon must be > 0");
  if (std::abs(a.total() - 1.0) > 1e-12 || std::abs(b.total() - 1.0) > 1e-12)
    throw std::invalid_argument(
        "gem_ot: measures must lie on the simplex (totals = 1); normalize the inputs first");

  const double eps_prime = epsilon / 16.0;
  const double eta = eps_prime / 2.0;
  const double gamma = cost.max_abs() + eta;
  const double tau = 16.0 * cost.max_abs() * static_cast<double>(cost.n()) * gamma / epsilon;

  UotProblem inner_problem(cost, a, b, tau);
  GemConfig config;
  config.epsilon = eps_prime;
  config.eta = eta;
  config.max_iters = max_iters;
  auto [plan, report] = gem_uot(inner_problem, config);

  FeasiblePlan rounded = proj_polytope(plan, a, b);
  GemOtReport out;
  out.objective = (cost.entries().array() * rounded.entries().array()).sum();
  out.ot_gap_bound = epsilon;
  out.tau_used = tau;
  out.eta_used = eta;
  out.inner = std::move(report);
  return {std::move(rounded), std::move(out)};
}

}  // namespace uot
