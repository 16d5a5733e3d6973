#pragma once

#include <cstdint>

#include "uot/types.hpp"

namespace uot {

/// Seeded generator settings for synthetic instances. The seed fully
/// determines the instance on a given platform.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  Eigen::Index n = 200;
  double alpha = 4.0;  // total mass of a
  double beta = 5.0;   // total mass of b
  double tau = 55.0;
  double cost_lo = 0.1;
  double cost_hi = 1.0;
  double b_sigma = 0.1;  // relative spread of the b entries around uniform
};

/// Reproducible instance: a uniform on [0.1, 1] rescaled to total alpha;
/// b normal around uniform mass with spread b_sigma, clipped strictly
/// positive, rescaled to total beta; costs uniform on [cost_lo, cost_hi].
UotProblem generate_synthetic(const ExperimentConfig& config);

/// Same construction with both measures rescaled to the simplex (totals 1).
UotProblem generate_synthetic_normalized(const ExperimentConfig& config);

}  // namespace uot
