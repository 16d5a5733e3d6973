#include "uot/dual.hpp"

#include <cmath>
#include <json.hpp>

#include "uot/objectives.hpp"

namespace uot {

VectorXd DualPoint::to_flat() const {
  const Eigen::Index nn = n();
  VectorXd flat(flat_size());
  flat.head(nn) = u;
  flat.segment(nn, nn) = v;
  for (Eigen::Index i = 0; i < nn; ++i) flat.segment(2 * nn + i * nn, nn) = t.row(i).transpose();
  return flat;
}

DualPoint DualPoint::from_flat(const VectorXd& flat, Eigen::Index n) {
  if (flat.size() != 2 * n + n * n)
    throw std::invalid_argument("DualPoint::from_flat: length mismatch");
  DualPoint x;
  x.u = flat.head(n);
  x.v = flat.segment(n, n);
  x.t.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) x.t.row(i) = flat.segment(2 * n + i * n, n).transpose();
  return x;
}

BoxV make_box(const UotProblem& problem, const DerivedConstants& constants) {
  BoxV box;
  const double tau = problem.tau();
  box.u_lo = tau * (2.0 * problem.a().weights() / constants.q).array().log();
  box.v_lo = tau * (2.0 * problem.b().weights() / constants.q).array().log();
  box.upper = constants.D;
  return box;
}

bool is_feasible_dual(const UotProblem& problem, const DualPoint& x, double slack) {
  const Eigen::Index n = x.n();
  if (x.t.minCoeff() < -slack) return false;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (x.t(i, j) < x.u[i] + x.v[j] - problem.cost()(i, j) - slack) return false;
  return true;
}

SplitDualValue dual_objective_heta(const UotProblem& problem, double eta, const DualPoint& x,
                                   const DerivedConstants& constants) {
  if (!(eta > 0.0)) throw std::invalid_argument("dual_objective_heta: eta must be > 0");
  const Eigen::Index n = x.n();
  if (n != problem.n() || x.v.size() != n || x.t.rows() != n || x.t.cols() != n)
    throw std::invalid_argument("dual_objective_heta: dimension mismatch");
  const double tau = problem.tau();
  const double c0 = constants.c0;

  Eigen::ArrayXd eu = (-x.u.array() / tau).exp();
  Eigen::ArrayXd ev = (-x.v.array() / tau).exp();
  const double pot_sq = x.u.squaredNorm() + x.v.squaredNorm();

  const double f_val = tau * (eu * problem.a().weights().array()).sum() +
                       tau * (ev * problem.b().weights().array()).sum() - c0 * pot_sq;
  const double w_val = c0 * pot_sq + x.t.squaredNorm() / (4.0 * eta);

  SplitDualValue out;
  out.value = f_val + w_val;
  out.grad_f = VectorXd::Zero(x.flat_size());
  out.grad_w = VectorXd::Zero(x.flat_size());
  out.grad_f.head(n) = (-(eu * problem.a().weights().array()) - 2.0 * c0 * x.u.array()).matrix();
  out.grad_f.segment(n, n) =
      (-(ev * problem.b().weights().array()) - 2.0 * c0 * x.v.array()).matrix();
  out.grad_w.head(n) = 2.0 * c0 * x.u;
  out.grad_w.segment(n, n) = 2.0 * c0 * x.v;
  for (Eigen::Index i = 0; i < n; ++i)
    out.grad_w.segment(2 * n + i * n, n) = x.t.row(i).transpose() / (2.0 * eta);
  return out;
}

ReducedDualValue relaxed_dual_ha(const UotProblem& problem, double eta,
                                 const ReducedDualPoint& x) {
  if (!(eta > 0.0)) throw std::invalid_argument("relaxed_dual_ha: eta must be > 0");
  const Eigen::Index n = x.n();
  if (n != problem.n() || x.v.size() != n)
    throw std::invalid_argument("relaxed_dual_ha: dimension mismatch");
  const double tau = problem.tau();

  Eigen::ArrayXd eu = (-x.u.array() / tau).exp();
  Eigen::ArrayXd ev = (-x.v.array() / tau).exp();

  double hinge_sq = 0.0;
  VectorXd hinge_row = VectorXd::Zero(n);
  VectorXd hinge_col = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = x.u[i] + x.v[j] - problem.cost()(i, j);
      if (s > 0.0) {
        hinge_sq += s * s;
        hinge_row[i] += s;
        hinge_col[j] += s;
      }
    }
  }

  ReducedDualValue out;
  out.value = hinge_sq / (4.0 * eta) + tau * (eu * problem.a().weights().array()).sum() +
              tau * (ev * problem.b().weights().array()).sum();
  out.grad.resize(2 * n);
  out.grad.head(n) =
      (-(eu * problem.a().weights().array()) + hinge_row.array() / (2.0 * eta)).matrix();
  out.grad.tail(n) =
      (-(ev * problem.b().weights().array()) + hinge_col.array() / (2.0 * eta)).matrix();
  return out;
}

ReducedDualValue entropic_dual_h(const UotProblem& problem, double eta,
                                 const ReducedDualPoint& x) {
  if (!(eta > 0.0)) throw std::invalid_argument("entropic_dual_h: eta must be > 0");
  const Eigen::Index n = x.n();
  if (n != problem.n() || x.v.size() != n)
    throw std::invalid_argument("entropic_dual_h: dimension mismatch");
  const double tau = problem.tau();

  // Stabilize eta * sum exp(s/eta) as eta * e^{m/eta} * sum exp((s-m)/eta) with
  // m = max s; overflow of the leading factor means genuine divergence.
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m = std::max(m, x.u[i] + x.v[j] - problem.cost()(i, j));

  double shifted_sum = 0.0;
  VectorXd row_sum = VectorXd::Zero(n), col_sum = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double e = std::exp((x.u[i] + x.v[j] - problem.cost()(i, j) - m) / eta);
      shifted_sum += e;
      row_sum[i] += e;
      col_sum[j] += e;
    }
  }
  const double scale = std::exp(m / eta);
  if (!std::isfinite(scale) || !std::isfinite(scale * shifted_sum))
    throw DivergenceError("entropic_dual_h: exponential overflow despite stabilization");

  Eigen::ArrayXd eu = (-x.u.array() / tau).exp();
  Eigen::ArrayXd ev = (-x.v.array() / tau).exp();

  ReducedDualValue out;
  out.value = eta * scale * shifted_sum + tau * (eu * problem.a().weights().array()).sum() +
              tau * (ev * problem.b().weights().array()).sum();
  out.grad.resize(2 * n);
  out.grad.head(n) = (scale * row_sum.array() - eu * problem.a().weights().array()).matrix();
  out.grad.tail(n) = (scale * col_sum.array() - ev * problem.b().weights().array()).matrix();
  if (!out.grad.allFinite())
    throw DivergenceError("entropic_dual_h: gradient overflow despite stabilization");
  return out;
}

TransportPlan recover_plan(const UotProblem& problem, double eta, const ReducedDualPoint& x) {
  if (!(eta > 0.0)) throw std::invalid_argument("recover_plan: eta must be > 0");
  const Eigen::Index n = x.n();
  MatrixXd X(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      X(i, j) = std::max(0.0, x.u[i] + x.v[j] - problem.cost()(i, j)) / (2.0 * eta);
  return TransportPlan(std::move(X));
}

double duality_gap(const UotProblem& problem, double eta, const TransportPlan& X,
                   const DualPoint& x) {
  const Eigen::Index n = x.n();
  if (n != problem.n()) throw std::invalid_argument("duality_gap: dimension mismatch");
  const double tau = problem.tau();

  double t_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double lifted = std::max({x.t(i, j), 0.0, x.u[i] + x.v[j] - problem.cost()(i, j)});
      t_sq += lifted * lifted;
    }
  }
  // constant term tau(alpha+beta): the KL conjugate is tau<e^{w/tau}, a> - tau*alpha,
  // so the dual value vanishes against the primal at the optimal pair for every tau
  double dual = -t_sq / (4.0 * eta) -
                tau * ((-x.u.array() / tau).exp() * problem.a().weights().array()).sum() -
                tau * ((-x.v.array() / tau).exp() * problem.b().weights().array()).sum() +
                tau * (problem.a().total() + problem.b().total());
  return reg_objective(problem, eta, X) - dual;
}

double optimality_residual(const UotProblem& problem, double eta, const ReducedDualPoint& x) {
  TransportPlan X = recover_plan(problem, eta, x);
  VectorXd row = X.row_marginal();
  VectorXd col = X.col_marginal();
  if (row.minCoeff() <= 0.0 || col.minCoeff() <= 0.0)
    throw std::domain_error("optimality_residual: zero marginal, residual undefined");
  const double tau = problem.tau();
  double res = 0.0;
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    res = std::max(res, std::abs(-x.u[i] / tau + std::log(problem.a()[i]) - std::log(row[i])));
    res = std::max(res, std::abs(-x.v[i] / tau + std::log(problem.b()[i]) - std::log(col[i])));
  }
  return res;
}

std::string dual_point_to_json(const DualPoint& x) {
  nlohmann::json j;
  j["u"] = std::vector<double>(x.u.data(), x.u.data() + x.u.size());
  j["v"] = std::vector<double>(x.v.data(), x.v.data() + x.v.size());
  std::vector<std::vector<double>> t;
  for (Eigen::Index i = 0; i < x.t.rows(); ++i) {
    t.emplace_back(x.t.row(i).begin(), x.t.row(i).end());
  }
  j["t"] = t;
  return j.dump();
}

}  // namespace uot
