#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace uot {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Thrown when a solver produces non-finite iterates or fails to make progress.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nonnegative mass vector with cached total and minimum mass.
/// Every entry must be strictly positive (assumption on the input measures);
/// the cached total and minimum are never recomputed after construction.
class Measure {
 public:
  explicit Measure(VectorXd weights) : w_(std::move(weights)) {
    if (w_.size() == 0) throw std::invalid_argument("Measure: empty weight vector");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
      if (!std::isfinite(w_[i])) throw std::invalid_argument("Measure: non-finite entry");
      if (w_[i] <= 0.0) throw std::invalid_argument("Measure: entries must be strictly positive");
    }
    total_ = w_.sum();
    min_entry_ = w_.minCoeff();
  }

  const VectorXd& weights() const { return w_; }
  double total() const { return total_; }
  double min_entry() const { return min_entry_; }
  Eigen::Index size() const { return w_.size(); }
  double operator[](Eigen::Index i) const { return w_[i]; }

 private:
  VectorXd w_;
  double total_;
  double min_entry_;
};

/// Square matrix of nonnegative, finite transport costs with cached sup norm.
class CostMatrix {
 public:
  explicit CostMatrix(MatrixXd entries) : c_(std::move(entries)) {
    if (c_.rows() != c_.cols() || c_.rows() == 0)
      throw std::invalid_argument("CostMatrix: must be square and nonempty");
    if (!c_.allFinite()) throw std::invalid_argument("CostMatrix: non-finite entry");
    if (c_.minCoeff() < 0.0) throw std::invalid_argument("CostMatrix: negative entry");
    max_abs_ = c_.cwiseAbs().maxCoeff();
  }

  const MatrixXd& entries() const { return c_; }
  double max_abs() const { return max_abs_; }
  Eigen::Index n() const { return c_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return c_(i, j); }

 private:
  MatrixXd c_;
  double max_abs_;
};

/// Nonnegative n-by-n transport plan (mass units).
class TransportPlan {
 public:
  explicit TransportPlan(MatrixXd entries) : x_(std::move(entries)) {
    if (x_.rows() != x_.cols() || x_.rows() == 0)
      throw std::invalid_argument("TransportPlan: must be square and nonempty");
    if (!x_.allFinite()) throw std::invalid_argument("TransportPlan: non-finite entry");
    if (x_.minCoeff() < -0.0) {
      if (x_.minCoeff() < 0.0) throw std::invalid_argument("TransportPlan: negative entry");
    }
  }

  const MatrixXd& entries() const { return x_; }
  Eigen::Index n() const { return x_.rows(); }
  VectorXd row_marginal() const { return x_.rowwise().sum(); }
  VectorXd col_marginal() const { return x_.colwise().sum().transpose(); }

 private:
  MatrixXd x_;
};

/// Immutable problem statement: cost matrix, the two measures, and the
/// marginal-penalty weight tau.
class UotProblem {
 public:
  UotProblem(CostMatrix cost, Measure a, Measure b, double tau)
      : cost_(std::move(cost)), a_(std::move(a)), b_(std::move(b)), tau_(tau) {
    if (a_.size() != cost_.n() || b_.size() != cost_.n())
      throw std::invalid_argument("UotProblem: dimension mismatch between cost and measures");
    if (!(tau_ > 0.0) || !std::isfinite(tau_))
      throw std::invalid_argument("UotProblem: tau must be positive and finite");
  }

  const CostMatrix& cost() const { return cost_; }
  const Measure& a() const { return a_; }
  const Measure& b() const { return b_; }
  double tau() const { return tau_; }
  Eigen::Index n() const { return cost_.n(); }

  /// Checks the regularity condition tau >= factor * min{1/(alpha+beta), ||C||inf}.
  /// Returns a warning message when violated; intentionally not an error, since
  /// exploring outside the regime is legitimate.
  std::optional<std::string> tau_regularity_warning(double factor = 1.0) const {
    double threshold = factor * std::min(1.0 / (a_.total() + b_.total()), cost_.max_abs());
    if (tau_ < threshold) {
      return "tau = " + std::to_string(tau_) +
             " is below the regularity threshold min{1/(alpha+beta), ||C||inf} = " +
             std::to_string(threshold) + "; convergence guarantees may not apply";
    }
    return std::nullopt;
  }

 private:
  CostMatrix cost_;
  Measure a_;
  Measure b_;
  double tau_;
};

}  // namespace uot
