#include <cmath>

#include "uot/lp.hpp"
#include "uot/objectives.hpp"
#include "uot/reference.hpp"

namespace uot {

namespace {

// generalized Hessian of the relaxed dual at (u, v); hinge terms where active
MatrixXd relaxed_hessian(const UotProblem& problem, double eta, const ReducedDualPoint& x) {
  const Eigen::Index n = problem.n();
  const double tau = problem.tau();
  MatrixXd H = MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    H(i, i) = problem.a()[i] * std::exp(-x.u[i] / tau) / tau;
  for (Eigen::Index j = 0; j < n; ++j)
    H(n + j, n + j) = problem.b()[j] * std::exp(-x.v[j] / tau) / tau;
  const double w = 1.0 / (2.0 * eta);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x.u[i] + x.v[j] - problem.cost()(i, j) > 0.0) {
        H(i, i) += w;
        H(n + j, n + j) += w;
        H(i, n + j) += w;
        H(n + j, i) += w;
      }
    }
  }
  return H;
}

}  // namespace

ReferenceResult uot_reference(const UotProblem& problem, double eta, double grad_tol,
                              int max_iters) {
  if (!(eta > 0.0)) throw std::invalid_argument("uot_reference: eta must be > 0");
  const Eigen::Index n = problem.n();
  ReducedDualPoint x;
  x.u = VectorXd::Zero(n);
  x.v = VectorXd::Zero(n);

  ReducedDualValue cur = relaxed_dual_ha(problem, eta, x);
  double lambda = 0.0;  // damping, escalated only on failed factorizations
  for (int it = 0; it < max_iters && cur.grad.norm() > grad_tol; ++it) {
    MatrixXd H = relaxed_hessian(problem, eta, x);
    VectorXd d;
    while (true) {
      MatrixXd Hd = H;
      if (lambda > 0.0) Hd.diagonal().array() += lambda;
      Eigen::LDLT<MatrixXd> ldlt(Hd);
      d = ldlt.solve(-cur.grad);
      if (ldlt.info() == Eigen::Success && d.allFinite() && cur.grad.dot(d) < 0.0) break;
      lambda = lambda == 0.0 ? 1e-10 : lambda * 10.0;
      if (lambda > 1e10) throw DivergenceError("uot_reference: damping exhausted");
    }
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      ReducedDualPoint xc{x.u + step * d.head(n), x.v + step * d.tail(n)};
      ReducedDualValue vc = relaxed_dual_ha(problem, eta, xc);
      // the additive term lets the search accept steps whose true decrease is
      // below the rounding noise of the value itself (endgame iterations)
      if (vc.value <= cur.value + 1e-4 * step * cur.grad.dot(d) +
                          1e-14 * (1.0 + std::abs(cur.value))) {
        x = std::move(xc);
        cur = std::move(vc);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    if (lambda > 0.0) lambda = std::max(0.0, lambda / 100.0);
  }

  const double q = problem.a().total() + problem.b().total();
  TransportPlan plan = recover_plan(problem, eta, x);
  ReferenceResult out{problem.tau() * q - cur.value, uot_objective(problem, plan), std::move(plan),
                      std::move(x), cur.grad.norm(), cur.grad.norm() <= grad_tol};
  return out;
}

double uot_true_value(const UotProblem& problem) {
  const double q = problem.a().total() + problem.b().total();
  return uot_reference(problem, 1e-8 * q * q).f_value;
}

std::vector<BoundReport> theorem2_check(const CostMatrix& cost, const Measure& a,
                                        const Measure& b, const std::vector<double>& tau_grid,
                                        double eta) {
  if (std::abs(a.total() - 1.0) > 1e-12 || std::abs(b.total() - 1.0) > 1e-12)
    throw std::invalid_argument("theorem2_check: measures must be normalized");
  const double n = static_cast<double>(cost.n());
  std::vector<BoundReport> out;
  for (double tau : tau_grid) {
    UotProblem problem(cost, a, b, tau);
    ReferenceResult ref = uot_reference(problem, eta);
    double gap = marginal_gap(ref.plan, a, b);
    double bound = 2.0 * n * cost.max_abs() / tau + 4.0 * n * eta / tau;
    out.push_back({tau, gap, bound, gap <= bound * (1.0 + 1e-6)});
  }
  return out;
}

double distance_bound_constant(const CostMatrix& cost, const Measure& a, const Measure& b) {
  const double n = static_cast<double>(cost.n());
  const double kappa = 1.0 / std::min(a.min_entry(), b.min_entry());
  const double c = cost.max_abs();
  return std::log(2.0) * c * c * (n + 3.0 * kappa) * (n + 3.0 * kappa) + 2.0 * n * c * c;
}

std::vector<BoundReport> theorem4_check(const CostMatrix& cost, const Measure& a,
                                        const Measure& b, const std::vector<double>& tau_grid) {
  if (std::abs(a.total() - 1.0) > 1e-12 || std::abs(b.total() - 1.0) > 1e-12)
    throw std::invalid_argument("theorem4_check: measures must be normalized");
  const double ot = exact_ot_lp(cost, a, b).value;
  const double M = distance_bound_constant(cost, a, b);
  std::vector<BoundReport> out;
  for (double tau : tau_grid) {
    UotProblem problem(cost, a, b, tau);
    double gap = ot - uot_true_value(problem);
    out.push_back({tau, gap, M / tau, gap <= M / tau * (1.0 + 1e-6)});
  }
  return out;
}

}  // namespace uot
