#pragma once

#include "uot/solvers.hpp"
#include "uot/types.hpp"

namespace uot {

/// Plan constrained to the transportation polytope: row sums equal a and
/// column sums equal b within 1e-9 total l1 error.
class FeasiblePlan {
 public:
  FeasiblePlan(MatrixXd entries, const Measure& a, const Measure& b)
      : x_(std::move(entries)) {
    if (x_.rows() != x_.cols() || x_.rows() != a.size() || x_.cols() != b.size())
      throw std::invalid_argument("FeasiblePlan: dimension mismatch");
    if (!x_.allFinite() || x_.minCoeff() < 0.0)
      throw std::invalid_argument("FeasiblePlan: entries must be finite and nonnegative");
    double err = (x_.rowwise().sum() - a.weights()).lpNorm<1>() +
                 (x_.colwise().sum().transpose() - b.weights()).lpNorm<1>();
    if (err > 1e-9)
      throw std::invalid_argument("FeasiblePlan: marginals off by " + std::to_string(err));
  }

  const MatrixXd& entries() const { return x_; }
  Eigen::Index n() const { return x_.rows(); }
  TransportPlan as_plan() const { return TransportPlan(x_); }

 private:
  MatrixXd x_;
};

/// Rounds a nonnegative matrix onto the transportation polytope: scale rows by
/// min(a_i/(X1)_i, 1), then columns by min(b_j/(X''^T 1)_j, 1), then add the
/// rank-one correction err_r err_c^T / ||err_r||_1. When ||err_r||_1 = 0 the
/// correction is skipped (the scaled matrix is already feasible).
/// Guarantees ||Y - X||_1 <= 2(||X1 - a||_1 + ||X^T1 - b||_1).
FeasiblePlan proj_polytope(const TransportPlan& X, const Measure& a, const Measure& b);

struct GemOtReport {
  double objective = 0.0;       // <C, Y>
  double ot_gap_bound = 0.0;    // requested epsilon
  double tau_used = 0.0;
  double eta_used = 0.0;
  SolveReport inner;            // the underlying regularized solve
};

/// Standard-OT retrieval: solves the penalized problem at
/// eps' = eps/16, eta = eps'/2, gamma = ||C||inf + eta, tau = 16||C||inf n gamma / eps,
/// then rounds the plan onto the polytope. Requires a and b on the simplex
/// (totals 1 within 1e-12 relative).
std::pair<FeasiblePlan, GemOtReport> gem_ot(const CostMatrix& cost, const Measure& a,
                                            const Measure& b, double epsilon,
                                            int max_iters = 1000000);

}  // namespace uot
