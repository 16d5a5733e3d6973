#pragma once

#include "uot/types.hpp"

namespace uot {

/// Generalized KL divergence sum_i x_i log(x_i/y_i) - x_i + y_i, with the
/// continuous extension 0*log(0) = 0. Requires y > 0 entrywise, x >= 0.
double kl_divergence(const VectorXd& x, const VectorXd& y);

/// Unregularized objective <C,X> + tau*KL(X1||a) + tau*KL(X^T1||b).
double uot_objective(const UotProblem& problem, const TransportPlan& X);

/// Squared-l2 regularized objective: uot_objective + eta*||X||_2^2
/// (entrywise 2-norm). Requires eta > 0.
double reg_objective(const UotProblem& problem, double eta, const TransportPlan& X);

/// Entropic objective <C,X> - eta*H(X) + penalties, H(X) = -sum X(log X - 1).
/// Requires X strictly positive.
double entropic_objective(const UotProblem& problem, double eta, const TransportPlan& X);

/// l1 distance of the marginals of X from (a, b).
double marginal_gap(const TransportPlan& X, const Measure& a, const Measure& b);

/// Fraction of entries with value <= threshold.
double sparsity_ratio(const TransportPlan& X, double threshold);

}  // namespace uot
