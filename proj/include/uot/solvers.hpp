#pragma once

#include <optional>
#include <vector>

#include "uot/dual.hpp"

namespace uot {

enum class StopReason { gap_tol, iter_budget, max_iters };

struct GemConfig {
  double epsilon = 1e-3;
  double eta = 0.0;  // <= 0 means auto: epsilon / (2R)
  int max_iters = 100000;
  double gap_tol = 0.0;  // <= 0 means auto: epsilon / 2
  double inner_tol = 0.0;  // <= 0 means auto: min(1e-9, epsilon * 1e-4)
  int inner_max_iters = 500;
  bool record_trace = false;

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("GemConfig: epsilon must be > 0");
    if (max_iters < 1) throw std::invalid_argument("GemConfig: max_iters must be >= 1");
    if (inner_max_iters < 1) throw std::invalid_argument("GemConfig: inner_max_iters >= 1");
  }
};

struct TraceRow {
  int iter;
  double f;
  double g_eta;
  double dual_gap;
  double marginal_gap;
};

struct SolveReport {
  int iterations = 0;
  double final_objective = 0.0;      // f value at the output plan
  double final_reg_objective = 0.0;  // g_eta value at the output plan
  std::vector<double> duality_gap_trace;
  std::vector<TraceRow> trace;  // filled when record_trace is set
  double final_duality_gap = 0.0;
  double marginal_gap = 0.0;
  double wall_time = 0.0;
  StopReason stop_reason = StopReason::max_iters;
  double eta_used = 0.0;
  bool inner_inexact = false;  // some prox subproblem returned before inner_tol
};

/// Upper bound used in place of the initial-distance quantity the iteration
/// budget needs (the exact value requires the unknown optimum). Assembled from
/// the dual value at zero, the gradient norm there, and the box diameter.
double delta_bound_surrogate(const UotProblem& problem, double eta,
                             const DerivedConstants& constants);

/// K0-style budget:
///   ceil( 4(1+sqrt(1+16L/mu)) *
///         log( (4 n^2 sqrt(delta_bound)/eta) *
///              max{L1/eps, e^{D/tau}/min{a_min,b_min}, 1/(alpha+beta)} ) )
/// floored at 1. Throws when the log argument is nonpositive.
long iteration_budget(const DerivedConstants& constants, const UotProblem& problem, double eta,
                      double epsilon, double delta_bound);

struct ProxResult {
  DualPoint x;
  bool exact = true;       // reached inner_tol
  double residual = 0.0;   // final box-projected gradient norm of the reduced problem
};

/// Minimizer of <g, x> + w_eta(x) + theta * P(x0, x) over the box intersected
/// with the dual cone constraints, where P is the Bregman distance of w_eta
/// scaled by 1/mu. The t-block has a closed form given (u, v); the reduced
/// piecewise-quadratic problem in (u, v) is solved by a projected Newton
/// method with Armijo backtracking (projected-gradient fallback).
ProxResult prox_map(const VectorXd& g, const DualPoint& x0, double theta, const BoxV& box,
                    const UotProblem& problem, double eta, const DerivedConstants& constants,
                    double inner_tol, int inner_max_iters);

/// Accelerated gradient-extrapolation solve of the regularized dual; returns
/// the plan recovered from the weighted-average t-block and a report. The
/// duality gap at the averaged dual point certifies the primal error.
std::pair<TransportPlan, SolveReport> gem_uot(const UotProblem& problem, const GemConfig& config);

/// Coordinatewise clamp of (u, v) into the box.
ReducedDualPoint box_project(const ReducedDualPoint& x, const BoxV& box);

struct RuotResult {
  double value = 0.0;  // distance estimate F_a at the averaged point
  TransportPlan plan;
  SolveReport report;
};

/// Convex (non-strongly-convex) variant on the relaxed dual h_a over the box,
/// with per-iteration parameters alpha_t=(t-1)/t, psi_t=(t-1)/2, rho_t=6L_a/t.
/// Returns the distance estimate F_a(avg) = tau(alpha+beta) - h_a(avg) and the
/// heuristic plan recovered from the averaged potentials.
RuotResult gem_ruot(const UotProblem& problem, const GemConfig& config);

/// Log-domain alternating exact coordinate minimization of the entropic dual.
/// Stops when the dual value's successive decrease drops below a tolerance
/// tied to epsilon, when the dual value reaches dual_target + epsilon (if a
/// target is given), or at max_iters. Output plan is strictly positive up to
/// floating-point underflow.
std::pair<TransportPlan, SolveReport> sinkhorn_uot(
    const UotProblem& problem, double eta, double epsilon, int max_iters,
    std::optional<double> dual_target = std::nullopt);

}  // namespace uot
