#include <random>

#include "uot/synthetic.hpp"

namespace uot {

namespace {

UotProblem generate(const ExperimentConfig& config, double total_a, double total_b) {
  if (config.n < 1) throw std::invalid_argument("generate_synthetic: n must be >= 1");
  if (!(total_a > 0.0) || !(total_b > 0.0))
    throw std::invalid_argument("generate_synthetic: totals must be positive");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  std::uniform_real_distribution<double> cost_dist(config.cost_lo, config.cost_hi);
  std::normal_distribution<double> noise(1.0, config.b_sigma);

  VectorXd a(config.n), b(config.n);
  for (Eigen::Index i = 0; i < config.n; ++i) a[i] = unit(rng);
  for (Eigen::Index i = 0; i < config.n; ++i) b[i] = std::max(noise(rng), 0.05);
  a *= total_a / a.sum();
  b *= total_b / b.sum();

  MatrixXd C(config.n, config.n);
  for (Eigen::Index i = 0; i < config.n; ++i)
    for (Eigen::Index j = 0; j < config.n; ++j) C(i, j) = cost_dist(rng);

  return UotProblem(CostMatrix(std::move(C)), Measure(std::move(a)), Measure(std::move(b)),
                    config.tau);
}

}  // namespace

UotProblem generate_synthetic(const ExperimentConfig& config) {
  return generate(config, config.alpha, config.beta);
}

UotProblem generate_synthetic_normalized(const ExperimentConfig& config) {
  return generate(config, 1.0, 1.0);
}

}  // namespace uot
