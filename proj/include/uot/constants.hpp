#pragma once

#include "uot/types.hpp"

namespace uot {

/// Scalar quantities derived from a problem instance and the regularization
/// weight eta. Computed once per solve; all downstream step sizes and
/// iteration budgets read from here.
struct DerivedConstants {
  double alpha;  // total mass of a
  double beta;   // total mass of b
  double a_min;
  double b_min;
  double kappa;  // 1 / min{a_min, b_min}
  double R;      // (alpha+beta)^2 / 4
  double p;      // (1/2) min{a_min,b_min} e^{-D/tau}
  double q;      // alpha + beta
  double D;      // dual-potential upper bound
  double L1;     // Lipschitz constant of the primal objective in l1
  double L;      // smoothness constant of f_eta on the box
  double mu;     // strong-convexity constant of w_eta
  double L_a;    // smoothness constant of the relaxed dual h_a
  double c0;     // split coefficient (min{a_min,b_min}/(2 tau)) e^{-D/tau}
};

/// Evaluates the derived constants:
///   D   = ||C||inf + eta(alpha+beta) + tau log((alpha+beta)/2)
///         - tau min{log a_min, log b_min}
///   L   = (alpha+beta)/(2 tau) + (min{a_min,b_min}/tau) e^{-D/tau}
///   mu  = min{(min{a_min,b_min}/tau) e^{-D/tau}, 1/(2 eta)}
///   L_a = (alpha+beta)/tau + 2 sqrt(n)/eta
///   L1  = ||C||inf + 2 eta q + 2 tau|log p| + 2 tau|log q|
///         + tau max_i|log a_i| + tau max_i|log b_i|
DerivedConstants derived_constants(const UotProblem& problem, double eta);

}  // namespace uot
