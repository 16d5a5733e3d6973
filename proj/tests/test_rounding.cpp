#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uot/lp.hpp"
#include "uot/objectives.hpp"
#include "uot/rounding.hpp"

using namespace uot;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

MatrixXd mat2(double a, double b, double c, double d) {
  MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("feasible plan wrapper validates marginals") {
  Measure a(vec({0.5, 0.5})), b(vec({0.5, 0.5}));
  FeasiblePlan ok(mat2(0.5, 0, 0, 0.5), a, b);
  CHECK(ok.n() == 2);
  CHECK_THROWS_AS(FeasiblePlan(mat2(0.4, 0, 0, 0.5), a, b), std::invalid_argument);
  CHECK_THROWS_AS(FeasiblePlan(mat2(0.5, -0.1, 0.1, 0.5), a, b), std::invalid_argument);
  CHECK_THROWS_AS(FeasiblePlan(MatrixXd::Zero(3, 3), a, b), std::invalid_argument);
}

TEST_CASE("polytope rounding hand-traced examples") {
  Measure a(vec({0.5, 0.5})), b(vec({0.5, 0.5}));

  // diagonal with excess mass: rows scale by 5/6, columns already match after
  // that, no residual correction needed
  FeasiblePlan y1 = proj_polytope(TransportPlan(mat2(0.6, 0, 0, 0.6)), a, b);
  CHECK(y1.entries()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y1.entries()(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y1.entries()(0, 1) == 0.0);

  // uniform deficient plan: scaling leaves it untouched, the rank-one
  // correction spreads the missing mass evenly
  FeasiblePlan y2 = proj_polytope(TransportPlan(mat2(0.2, 0.2, 0.2, 0.2)), a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(y2.entries()(i, j) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("polytope rounding leaves feasible plans unchanged") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3;
    MatrixXd X(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) X(i, j) = unit(rng);
    Measure a(X.rowwise().sum()), b(X.colwise().sum().transpose());
    FeasiblePlan y = proj_polytope(TransportPlan(X), a, b);
    CHECK((y.entries() - X).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("polytope rounding: feasibility and distance bound on random input") {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mass(0.2, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + trial % 4;
    MatrixXd X(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) X(i, j) = unit(rng);
    VectorXd av(n), bv(n);
    for (int i = 0; i < n; ++i) {
      av[i] = mass(rng);
      bv[i] = mass(rng);
    }
    bv *= av.sum() / bv.sum();  // polytope nonempty
    Measure a(av), b(bv);
    TransportPlan plan(X);
    FeasiblePlan y = proj_polytope(plan, a, b);  // constructor enforces marginals <= 1e-9
    double moved = (y.entries() - X).lpNorm<1>();
    CHECK(moved <= 2.0 * marginal_gap(plan, a, b) + 1e-9);
  }
}

TEST_CASE("polytope rounding handles zero rows and zero plans") {
  Measure a(vec({0.5, 0.5})), b(vec({0.5, 0.5}));
  FeasiblePlan y = proj_polytope(TransportPlan(MatrixXd::Zero(2, 2)), a, b);
  // all mass comes from the rank-one correction a b^T / |a|
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(y.entries()(i, j) == doctest::Approx(0.25).epsilon(1e-14));

  FeasiblePlan z = proj_polytope(TransportPlan(mat2(1.0, 0, 0, 0)), a, b);
  CHECK(z.entries().minCoeff() >= 0.0);
}

TEST_CASE("standard transport retrieval on a pinned instance") {
  MatrixXd C(2, 2);
  C << 0, 1, 1, 0;
  Measure a(vec({0.7, 0.3})), b(vec({0.4, 0.6}));
  const double eps = 0.05;
  auto [plan, report] = gem_ot(CostMatrix(C), a, b, eps);
  double cost = (C.array() * plan.entries().array()).sum();
  // LP optimum is 0.3; the retrieval is eps-suboptimal and never better
  CHECK(cost <= 0.3 + eps);
  CHECK(cost >= 0.3 - 1e-9);
  CHECK(report.ot_gap_bound == eps);
  CHECK(report.tau_used > 0.0);
  CHECK(report.eta_used > 0.0);
}

TEST_CASE("standard transport retrieval with a free diagonal") {
  MatrixXd C(3, 3);
  C << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  Measure a(vec({0.2, 0.5, 0.3})), b(vec({0.2, 0.5, 0.3}));
  const double eps = 0.05;
  auto [plan, report] = gem_ot(CostMatrix(C), a, b, eps);
  // identical marginals and zero diagonal: optimum is 0
  double cost = (C.array() * plan.entries().array()).sum();
  CHECK(cost <= eps);
  CHECK(cost >= -1e-12);
}

TEST_CASE("standard transport retrieval tracks the exact optimum on random instances") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  const double eps = 0.05;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 3 + trial;
    MatrixXd C(n, n);
    VectorXd av(n), bv(n);
    for (int i = 0; i < n; ++i) {
      av[i] = unit(rng);
      bv[i] = unit(rng);
      for (int j = 0; j < n; ++j) C(i, j) = unit(rng);
    }
    av /= av.sum();
    bv /= bv.sum();
    Measure a(av), b(bv);
    double lp = exact_ot_lp(CostMatrix(C), a, b).value;
    auto [plan, report] = gem_ot(CostMatrix(C), a, b, eps);
    double cost = (C.array() * plan.entries().array()).sum();
    CHECK(cost >= lp - 1e-9);
    CHECK(cost <= lp + eps);
  }
}

TEST_CASE("standard transport retrieval rejects unnormalized measures") {
  MatrixXd C(2, 2);
  C << 0, 1, 1, 0;
  CHECK_THROWS_AS(gem_ot(CostMatrix(C), Measure(vec({0.7, 0.7})), Measure(vec({0.4, 0.6})), 0.05),
                  std::invalid_argument);
}
