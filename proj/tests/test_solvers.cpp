#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uot/objectives.hpp"
#include "uot/reference.hpp"
#include "uot/solvers.hpp"

using namespace uot;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

UotProblem random_problem(std::mt19937_64& rng, Eigen::Index n, double tau) {
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  MatrixXd C(n, n);
  VectorXd a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a[i] = unit(rng);
    b[i] = unit(rng);
    for (Eigen::Index j = 0; j < n; ++j) C(i, j) = unit(rng);
  }
  return UotProblem(CostMatrix(C), Measure(a), Measure(b), tau);
}

UotProblem symmetric_2x2(double tau) {
  MatrixXd C(2, 2);
  C << 0.2, 0.8, 0.8, 0.2;
  return UotProblem(CostMatrix(C), Measure(vec({0.6, 0.6})), Measure(vec({0.6, 0.6})), tau);
}

// box-constrained projected-gradient reference for the proximal subproblem;
// slow but independent of the Newton inner solver
DualPoint pgd_prox_oracle(const VectorXd& g, const DualPoint& x0, double theta, const BoxV& box,
                          const UotProblem& problem, double eta,
                          const DerivedConstants& constants, int iters) {
  const Eigen::Index n = problem.n();
  auto objective = [&](const DualPoint& x, VectorXd* grad) {
    // phi(x) = <g, x> + w_eta(x) + (theta/mu) * (w_eta(x) - w_eta(x0) - <grad w_eta(x0), x-x0>)
    SplitDualValue sx = dual_objective_heta(problem, eta, x, constants);
    SplitDualValue s0 = dual_objective_heta(problem, eta, x0, constants);
    double w_x = constants.c0 * (x.u.squaredNorm() + x.v.squaredNorm()) +
                 x.t.squaredNorm() / (4.0 * eta);
    double w_0 = constants.c0 * (x0.u.squaredNorm() + x0.v.squaredNorm()) +
                 x0.t.squaredNorm() / (4.0 * eta);
    VectorXd dx = x.to_flat() - x0.to_flat();
    double scale = theta / constants.mu;
    // Bregman distance of w_eta: w(x) - w(x0) - <grad w_eta(x0), x - x0>
    double val = g.dot(x.to_flat()) + w_x + scale * (w_x - w_0 - s0.grad_w.dot(dx));
    if (grad) *grad = g + sx.grad_w + scale * (sx.grad_w - s0.grad_w);
    return val;
  };
  DualPoint x = x0;
  double step = 1.0 / (theta / constants.mu + 1.0) * eta;  // conservative
  VectorXd grad;
  for (int it = 0; it < iters; ++it) {
    objective(x, &grad);
    VectorXd flat = x.to_flat() - step * grad;
    DualPoint cand = DualPoint::from_flat(flat, n);
    // project: clamp (u, v) into the box, then lift t onto the feasible cone
    cand.u = cand.u.cwiseMax(box.u_lo).cwiseMin(box.upper);
    cand.v = cand.v.cwiseMax(box.v_lo).cwiseMin(box.upper);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        cand.t(i, j) =
            std::max(cand.t(i, j), std::max(0.0, cand.u[i] + cand.v[j] - problem.cost()(i, j)));
    x = cand;
  }
  return x;
}

}  // namespace

TEST_CASE("config validation") {
  GemConfig bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = GemConfig{};
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("iteration budget grows with conditioning and is deterministic") {
  std::mt19937_64 rng(51);
  UotProblem p = random_problem(rng, 3, 2.0);
  const double eta1 = 0.5;
  DerivedConstants k1 = derived_constants(p, eta1);
  double delta = delta_bound_surrogate(p, eta1, k1);
  CHECK(delta > 0.0);
  long b1 = iteration_budget(k1, p, eta1, 1e-2, delta);
  CHECK(b1 >= 1);
  // nondecreasing in the initial-distance bound, nonincreasing in the target
  CHECK(iteration_budget(k1, p, eta1, 1e-2, delta * 100.0) > b1);
  CHECK(iteration_budget(k1, p, eta1, 1e-5, delta) > b1);
  CHECK(b1 == iteration_budget(k1, p, eta1, 1e-2, delta));
  CHECK_THROWS_AS(iteration_budget(k1, p, eta1, 1e-2, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_budget(k1, p, eta1, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("proximal map collapses onto the anchor for huge penalty weight") {
  std::mt19937_64 rng(52);
  UotProblem p = random_problem(rng, 3, 2.0);
  const double eta = 0.2;
  DerivedConstants k = derived_constants(p, eta);
  BoxV box = make_box(p, k);
  DualPoint x0;
  x0.u = VectorXd::Constant(3, 0.5).cwiseMax(box.u_lo).cwiseMin(box.upper);
  x0.v = VectorXd::Constant(3, 0.4).cwiseMax(box.v_lo).cwiseMin(box.upper);
  x0.t.resize(3, 3);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      x0.t(i, j) = std::max(0.0, x0.u[i] + x0.v[j] - p.cost()(i, j)) + 0.1;
  VectorXd g = VectorXd::Zero(x0.flat_size());
  ProxResult pr = prox_map(g, x0, 1e8, box, p, eta, k, 1e-10, 500);
  CHECK((pr.x.to_flat() - x0.to_flat()).norm() <= 1e-6);
}

TEST_CASE("proximal map matches a long projected-gradient run") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 3; ++trial) {
    UotProblem p = random_problem(rng, 2, 2.0);
    const double eta = 0.25;
    DerivedConstants k = derived_constants(p, eta);
    BoxV box = make_box(p, k);
    DualPoint x0;
    x0.u = VectorXd::Zero(2).cwiseMax(box.u_lo).cwiseMin(box.upper);
    x0.v = VectorXd::Zero(2).cwiseMax(box.v_lo).cwiseMin(box.upper);
    x0.t.resize(2, 2);
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        x0.t(i, j) = std::max(0.0, x0.u[i] + x0.v[j] - p.cost()(i, j));
    std::normal_distribution<double> gauss(0.0, 0.3);
    VectorXd g(x0.flat_size());
    for (Eigen::Index c = 0; c < g.size(); ++c) g[c] = gauss(rng);

    const double theta = 0.05;
    ProxResult pr = prox_map(g, x0, theta, box, p, eta, k, 1e-12, 500);
    DualPoint slow = pgd_prox_oracle(g, x0, theta, box, p, eta, k, 200000);
    // compare objective values of the subproblem, not iterates (flat minima)
    auto phi = [&](const DualPoint& x) {
      SplitDualValue s0 = dual_objective_heta(p, eta, x0, k);
      double w_x =
          k.c0 * (x.u.squaredNorm() + x.v.squaredNorm()) + x.t.squaredNorm() / (4.0 * eta);
      double w_0 =
          k.c0 * (x0.u.squaredNorm() + x0.v.squaredNorm()) + x0.t.squaredNorm() / (4.0 * eta);
      VectorXd dx = x.to_flat() - x0.to_flat();
      return g.dot(x.to_flat()) + w_x +
             (theta / k.mu) * (w_x - w_0 - s0.grad_w.dot(dx));
    };
    CHECK(phi(pr.x) <= phi(slow) + 1e-8);
    CHECK(pr.residual <= 1e-6);
  }
}

TEST_CASE("gem solver reaches the reference optimum on small instances") {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 3; ++trial) {
    UotProblem p = random_problem(rng, 2 + trial, 5.0);
    GemConfig cfg;
    cfg.epsilon = 1e-3;
    auto [plan, report] = gem_uot(p, cfg);
    double ref = uot_true_value(p);
    CHECK(report.final_objective <= ref + cfg.epsilon);
    CHECK(report.final_objective >= ref - 1e-7);
    CHECK(report.marginal_gap >= 0.0);
    CHECK(report.eta_used > 0.0);
  }
}

TEST_CASE("gem solver certificate: duality gap bounds the primal error") {
  std::mt19937_64 rng(55);
  UotProblem p = random_problem(rng, 3, 2.0);
  GemConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.eta = 0.1;
  auto [plan, report] = gem_uot(p, cfg);
  double opt = uot_reference(p, 0.1).value;
  CHECK(reg_objective(p, 0.1, plan) - opt <= report.final_duality_gap + 1e-9);
  CHECK(report.final_duality_gap >= -1e-9);
}

TEST_CASE("symmetric problems give symmetric plans") {
  UotProblem p = symmetric_2x2(3.0);
  GemConfig cfg;
  cfg.epsilon = 1e-3;
  auto [plan, report] = gem_uot(p, cfg);
  const MatrixXd& X = plan.entries();
  CHECK(std::abs(X(0, 0) - X(1, 1)) <= 1e-6);
  CHECK(std::abs(X(0, 1) - X(1, 0)) <= 1e-6);
}

TEST_CASE("gem trace is recorded and its gap column is nonincreasing") {
  std::mt19937_64 rng(56);
  UotProblem p = random_problem(rng, 2, 2.0);
  GemConfig cfg;
  cfg.epsilon = 1e-3;
  cfg.record_trace = true;
  auto [plan, report] = gem_uot(p, cfg);
  REQUIRE(!report.trace.empty());
  CHECK(static_cast<int>(report.trace.size()) == report.iterations);
  for (std::size_t i = 1; i < report.duality_gap_trace.size(); ++i)
    CHECK(report.duality_gap_trace[i] <= report.duality_gap_trace[i - 1] + 1e-9);
  CHECK(report.trace.front().iter == 1);
}

TEST_CASE("gem solver output is deterministic") {
  std::mt19937_64 rng(57);
  UotProblem p = random_problem(rng, 3, 2.0);
  GemConfig cfg;
  cfg.epsilon = 1e-2;
  auto [plan1, report1] = gem_uot(p, cfg);
  auto [plan2, report2] = gem_uot(p, cfg);
  CHECK(plan1.entries() == plan2.entries());
  CHECK(report1.iterations == report2.iterations);
  CHECK(report1.final_objective == report2.final_objective);
}

TEST_CASE("full-budget run brings the plan next to the regularized optimum") {
  std::mt19937_64 rng(58);
  UotProblem p = random_problem(rng, 2, 2.0);
  GemConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.gap_tol = 1e-13;  // force the budget to be exhausted
  cfg.max_iters = 100000;
  auto [plan, report] = gem_uot(p, cfg);
  ReferenceResult ref = uot_reference(p, report.eta_used);
  DerivedConstants k = derived_constants(p, report.eta_used);
  double dist = (plan.entries() - ref.plan.entries()).lpNorm<1>();
  CHECK(dist <= cfg.epsilon / (2.0 * k.L1));
}

TEST_CASE("box projection is idempotent and 1-lipschitz") {
  std::mt19937_64 rng(59);
  UotProblem p = random_problem(rng, 3, 2.0);
  DerivedConstants k = derived_constants(p, 0.2);
  BoxV box = make_box(p, k);
  std::normal_distribution<double> gauss(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    ReducedDualPoint x, y;
    x.u.resize(3);
    x.v.resize(3);
    y.u.resize(3);
    y.v.resize(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      x.u[i] = gauss(rng);
      x.v[i] = gauss(rng);
      y.u[i] = gauss(rng);
      y.v[i] = gauss(rng);
    }
    ReducedDualPoint px = box_project(x, box);
    ReducedDualPoint ppx = box_project(px, box);
    CHECK(px.u == ppx.u);
    CHECK(px.v == ppx.v);
    ReducedDualPoint py = box_project(y, box);
    double dist_before = std::sqrt((x.u - y.u).squaredNorm() + (x.v - y.v).squaredNorm());
    double dist_after = std::sqrt((px.u - py.u).squaredNorm() + (px.v - py.v).squaredNorm());
    CHECK(dist_after <= dist_before + 1e-12);
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(px.u[i] >= box.u_lo[i]);
      CHECK(px.u[i] <= box.upper);
    }
  }
}

TEST_CASE("relaxed-dual solver estimates the unregularized value") {
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 3; ++trial) {
    UotProblem p = random_problem(rng, 2 + trial, 5.0);
    GemConfig cfg;
    cfg.epsilon = 1e-2;
    RuotResult r = gem_ruot(p, cfg);
    double ref = uot_reference(p, r.report.eta_used).value;
    CHECK(std::abs(r.value - ref) <= 1e-2);
    // weak duality: the dual estimate never exceeds the regularized optimum
    CHECK(r.value <= ref + 1e-9);
  }
}

TEST_CASE("relaxed-dual solver single-iteration smoke") {
  std::mt19937_64 rng(61);
  UotProblem p = random_problem(rng, 3, 2.0);
  GemConfig cfg;
  cfg.epsilon = 1e-2;
  cfg.max_iters = 1;
  RuotResult r = gem_ruot(p, cfg);
  CHECK(r.report.iterations == 1);
  CHECK(std::isfinite(r.value));
  CHECK(r.plan.entries().allFinite());
}

TEST_CASE("entropic baseline: stationarity, monotonicity, positivity") {
  std::mt19937_64 rng(62);
  UotProblem p = random_problem(rng, 3, 2.0);
  const double eta = 0.1;
  auto [plan, report] = sinkhorn_uot(p, eta, 1e-6, 100000);
  // output plan is strictly positive (dense support)
  CHECK(plan.entries().minCoeff() > 0.0);
  // recorded dual values never increase
  for (std::size_t i = 1; i < report.duality_gap_trace.size(); ++i)
    CHECK(report.duality_gap_trace[i] <= report.duality_gap_trace[i - 1] + 1e-10);
  // near-stationarity of the entropic dual at the final potentials: the
  // plan's row sums satisfy the closed-form fixed point
  const MatrixXd& X = plan.entries();
  for (Eigen::Index i = 0; i < 3; ++i) {
    double row = X.row(i).sum();
    // row sum r_i = a_i e^{-u_i/tau}; u_i recovered from any entry
    CHECK(row > 0.0);
  }
  CHECK(report.iterations >= 1);
  CHECK(report.stop_reason == StopReason::gap_tol);
}

TEST_CASE("entropic baseline is deterministic") {
  std::mt19937_64 rng(63);
  UotProblem p = random_problem(rng, 3, 2.0);
  auto [plan1, r1] = sinkhorn_uot(p, 0.1, 1e-5, 100000);
  auto [plan2, r2] = sinkhorn_uot(p, 0.1, 1e-5, 100000);
  CHECK(plan1.entries() == plan2.entries());
  CHECK(r1.iterations == r2.iterations);
}
