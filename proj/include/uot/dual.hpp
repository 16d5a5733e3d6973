#pragma once

#include <string>

#include "uot/constants.hpp"
#include "uot/types.hpp"

namespace uot {

/// Full dual variables (u, v, t). Flat layout is fixed as [u | v | t row-major]
/// (dimension 2n + n^2); gradients and the inner solver rely on this ordering.
struct DualPoint {
  VectorXd u;
  VectorXd v;
  MatrixXd t;

  Eigen::Index n() const { return u.size(); }
  Eigen::Index flat_size() const { return 2 * n() + n() * n(); }
  VectorXd to_flat() const;
  static DualPoint from_flat(const VectorXd& flat, Eigen::Index n);
};

/// Reduced dual variables (u, v) for the relaxed and entropic duals.
struct ReducedDualPoint {
  VectorXd u;
  VectorXd v;

  Eigen::Index n() const { return u.size(); }
};

/// Coordinatewise box for the dual potentials: u_i in [tau log(2a_i/(alpha+beta)), D],
/// v_j likewise. The dual component functions are smooth and convex inside it.
struct BoxV {
  VectorXd u_lo;
  VectorXd v_lo;
  double upper;
};

/// Builds the box from the problem and its derived constants.
BoxV make_box(const UotProblem& problem, const DerivedConstants& constants);

/// True when t_ij >= 0 and t_ij >= u_i + v_j - C_ij for all i, j (set script-X),
/// with `slack` of absolute tolerance.
bool is_feasible_dual(const UotProblem& problem, const DualPoint& x, double slack = 1e-12);

struct SplitDualValue {
  double value;      // f_eta(x) + w_eta(x)
  VectorXd grad_f;   // flat gradient of f_eta
  VectorXd grad_w;   // flat gradient of w_eta
};

/// Value and split gradients of the dual objective h_eta = f_eta + w_eta with
///   f_eta = tau<e^{-u/tau}, a> + tau<e^{-v/tau}, b> - c0(||u||^2 + ||v||^2)
///   w_eta = c0(||u||^2 + ||v||^2) + (1/4 eta) sum t^2
/// where c0 is the split coefficient from the derived constants. The gradient
/// of f_eta over t is identically zero.
SplitDualValue dual_objective_heta(const UotProblem& problem, double eta, const DualPoint& x,
                                   const DerivedConstants& constants);

struct ReducedDualValue {
  double value;
  VectorXd grad;  // flat layout [u | v], length 2n
};

/// Relaxed dual h_a(u, v) = (1/4 eta) sum max{0, u_i+v_j-C_ij}^2
///                          + tau<e^{-u/tau}, a> + tau<e^{-v/tau}, b>.
/// Globally convex and C^1; at exact hinge kinks the gradient contribution is 0.
ReducedDualValue relaxed_dual_ha(const UotProblem& problem, double eta,
                                 const ReducedDualPoint& x);

/// Entropic dual h(u, v) = eta sum exp((u_i+v_j-C_ij)/eta)
///                         + tau<e^{-u/tau}, a> + tau<e^{-v/tau}, b>,
/// evaluated with max-subtraction. Throws DivergenceError when the stabilized
/// value still overflows.
ReducedDualValue entropic_dual_h(const UotProblem& problem, double eta,
                                 const ReducedDualPoint& x);

/// Primal plan from reduced dual potentials: X_ij = max{0, u_i+v_j-C_ij}/(2 eta).
TransportPlan recover_plan(const UotProblem& problem, double eta, const ReducedDualPoint& x);

/// g_eta(X) minus the dual value at x. The point x is first lifted to
/// feasibility via t_ij <- max{t_ij, 0, u_i+v_j-C_ij}. Nonnegative for any
/// primal-feasible X; zero at the optimal pair.
double duality_gap(const UotProblem& problem, double eta, const TransportPlan& X,
                   const DualPoint& x);

/// Max first-order-condition residual over all coordinates:
///   |-u_i/tau + log a_i - log(row sum of recovered plan)| and the v analogue.
/// Throws when a recovered row or column sum is zero.
double optimality_residual(const UotProblem& problem, double eta, const ReducedDualPoint& x);

/// JSON text {"u": [...], "v": [...], "t": [[...]]} for debugging.
std::string dual_point_to_json(const DualPoint& x);

}  // namespace uot
