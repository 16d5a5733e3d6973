#include "uot/objectives.hpp"

#include <cmath>

namespace uot {

double kl_divergence(const VectorXd& x, const VectorXd& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kl_divergence: dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("kl_divergence: nonpositive y entry");
    if (x[i] < 0.0) throw std::invalid_argument("kl_divergence: negative x entry");
    if (x[i] > 0.0) acc += x[i] * std::log(x[i] / y[i]) - x[i];
    acc += y[i];
  }
  return acc;
}

double uot_objective(const UotProblem& problem, const TransportPlan& X) {
  if (X.n() != problem.n()) throw std::invalid_argument("uot_objective: dimension mismatch");
  double cost = (problem.cost().entries().array() * X.entries().array()).sum();
  double tau = problem.tau();
  return cost + tau * kl_divergence(X.row_marginal(), problem.a().weights()) +
         tau * kl_divergence(X.col_marginal(), problem.b().weights());
}

double reg_objective(const UotProblem& problem, double eta, const TransportPlan& X) {
  if (!(eta > 0.0)) throw std::invalid_argument("reg_objective: eta must be > 0");
  return uot_objective(problem, X) + eta * X.entries().squaredNorm();
}

double entropic_objective(const UotProblem& problem, double eta, const TransportPlan& X) {
  if (!(eta > 0.0)) throw std::invalid_argument("entropic_objective: eta must be > 0");
  if (X.n() != problem.n()) throw std::invalid_argument("entropic_objective: dimension mismatch");
  if (X.entries().minCoeff() <= 0.0)
    throw std::invalid_argument("entropic_objective: plan must be strictly positive");
  double entropy = -(X.entries().array() * (X.entries().array().log() - 1.0)).sum();
  double cost = (problem.cost().entries().array() * X.entries().array()).sum();
  double tau = problem.tau();
  return cost - eta * entropy + tau * kl_divergence(X.row_marginal(), problem.a().weights()) +
         tau * kl_divergence(X.col_marginal(), problem.b().weights());
}

double marginal_gap(const TransportPlan& X, const Measure& a, const Measure& b) {
  if (X.n() != a.size() || X.n() != b.size())
    throw std::invalid_argument("marginal_gap: dimension mismatch");
  return (X.row_marginal() - a.weights()).lpNorm<1>() +
         (X.col_marginal() - b.weights()).lpNorm<1>();
}

double sparsity_ratio(const TransportPlan& X, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("sparsity_ratio: threshold must be >= 0");
  Eigen::Index count = (X.entries().array() <= threshold).count();
  return static_cast<double>(count) / static_cast<double>(X.n() * X.n());
}

}  // namespace uot
