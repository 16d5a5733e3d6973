#pragma once

#include <vector>

#include "uot/dual.hpp"
#include "uot/types.hpp"

namespace uot {

struct ReferenceResult {
  double value;        // regularized optimum, tau(alpha+beta) minus the relaxed dual minimum
  double f_value;      // unregularized objective evaluated at the recovered plan
  TransportPlan plan;
  ReducedDualPoint potentials;
  double grad_norm;    // final gradient norm of the relaxed dual
  bool converged;
};

/// High-precision minimizer of the relaxed dual (globally convex, C^1) by a
/// damped semismooth Newton method run to gradient norm <= grad_tol, then
/// plan recovery. Ground truth for the regularized problem at the given eta.
ReferenceResult uot_reference(const UotProblem& problem, double eta, double grad_tol = 1e-10,
                              int max_iters = 500);

/// Near-exact unregularized optimum: runs uot_reference at
/// eta = 1e-8 (alpha+beta)^2 and returns f at the recovered plan. The value
/// sits within [true optimum, true optimum + eta (alpha+beta)^2 / 4].
double uot_true_value(const UotProblem& problem);

struct BoundReport {
  double tau;
  double empirical_gap;
  double theoretical_bound;
  bool satisfied;  // empirical <= bound * (1 + 1e-6)
};

/// Marginal-infeasibility bound check: for each tau in the grid, solve the
/// regularized problem at a small eta and compare
/// marginal_gap <= 2n||C||inf/tau + 4n eta/tau. Requires normalized measures.
std::vector<BoundReport> theorem2_check(const CostMatrix& cost, const Measure& a,
                                        const Measure& b, const std::vector<double>& tau_grid,
                                        double eta = 1e-6);

/// Constant in the distance bound OT - UOT <= M/tau:
/// M = ln(2) ||C||inf^2 (n + 3 kappa)^2 + 2n ||C||inf^2.
double distance_bound_constant(const CostMatrix& cost, const Measure& a, const Measure& b);

/// Distance bound check: for each tau, empirical_gap = exact LP optimum minus
/// the extrapolated penalized optimum, compared against M/tau. The lower half
/// of the sandwich (gap >= -1e-7) is the caller's assertion.
std::vector<BoundReport> theorem4_check(const CostMatrix& cost, const Measure& a,
                                        const Measure& b, const std::vector<double>& tau_grid);

}  // namespace uot
