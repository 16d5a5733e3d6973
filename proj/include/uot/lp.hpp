#pragma once

#include "uot/rounding.hpp"
#include "uot/types.hpp"

namespace uot {

struct LpResult {
  double value;
  FeasiblePlan plan;
  VectorXd dual_u;  // row potentials
  VectorXd dual_v;  // column potentials
  long pivots;
};

/// Exact minimum of <C, X> over the transportation polytope via the
/// transportation simplex: northwest-corner starting basis, tree-structured
/// dual potentials, Dantzig entering rule with a Bland fallback after 10 n^2
/// pivots as the anti-cycling guard. The returned optimum is certified by
/// complementary slackness against the recovered potentials.
LpResult exact_ot_lp(const CostMatrix& C, const Measure& a, const Measure& b);

}  // namespace uot
