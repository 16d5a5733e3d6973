#pragma once

#include <limits>
#include <vector>

#include "uot/types.hpp"

namespace uot {

/// High-precision minimum of the entropic dual by damped Newton; the target
/// value the Sinkhorn iteration-count study measures convergence against.
double entropic_dual_optimum(const UotProblem& problem, double eta, double grad_tol = 1e-10,
                             int max_iters = 200);

struct ScalingRow {
  double tau;
  long gem_iterations;
  long sinkhorn_iterations;
  bool gem_censored;       // solver hit its cap before reaching the gap
  bool sinkhorn_censored;
};

struct ScalingFit {
  double gem_log_r2 = std::numeric_limits<double>::quiet_NaN();
  double gem_linear_r2 = std::numeric_limits<double>::quiet_NaN();
  double sinkhorn_log_r2 = std::numeric_limits<double>::quiet_NaN();
  double sinkhorn_linear_r2 = std::numeric_limits<double>::quiet_NaN();
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  ScalingFit fit;  // NaN fields when fewer than two uncensored points
};

/// Iteration-count scaling in tau. Both solvers run at a shared moderate eta
/// and are stopped when their own duality gap reaches epsilon: the
/// gradient-extrapolation solver via its primal-dual gap, Sinkhorn via
/// distance to the Newton-computed entropic dual optimum. Least-squares fits
/// of iterations against log(tau) and tau give the reported R^2 values.
ScalingStudy tau_scaling_study(const CostMatrix& cost, const Measure& a, const Measure& b,
                               const std::vector<double>& tau_grid, double epsilon,
                               double eta = 0.1, int max_iters = 2000000);

/// R^2 of the least-squares line y ~ a + b x. NaN when fewer than two points
/// or zero variance in y.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace uot
