#include "uot/constants.hpp"

#include <cmath>

namespace uot {

DerivedConstants derived_constants(const UotProblem& problem, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("derived_constants: eta must be > 0");
  DerivedConstants k{};
  const double tau = problem.tau();
  k.alpha = problem.a().total();
  k.beta = problem.b().total();
  k.a_min = problem.a().min_entry();
  k.b_min = problem.b().min_entry();
  const double m = std::min(k.a_min, k.b_min);
  k.kappa = 1.0 / m;
  k.q = k.alpha + k.beta;
  k.R = k.q * k.q / 4.0;
  k.D = problem.cost().max_abs() + eta * k.q + tau * std::log(k.q / 2.0) -
        tau * std::min(std::log(k.a_min), std::log(k.b_min));
  if (!std::isfinite(k.D)) throw std::invalid_argument("derived_constants: D not finite");
  const double decay = std::exp(-k.D / tau);
  k.p = 0.5 * m * decay;
  k.L = k.q / (2.0 * tau) + (m / tau) * decay;
  k.mu = std::min((m / tau) * decay, 1.0 / (2.0 * eta));
  k.c0 = (m / (2.0 * tau)) * decay;
  k.L_a = k.q / tau + 2.0 * std::sqrt(static_cast<double>(problem.n())) / eta;
  double log_a_max = problem.a().weights().array().log().abs().maxCoeff();
  double log_b_max = problem.b().weights().array().log().abs().maxCoeff();
  k.L1 = problem.cost().max_abs() + 2.0 * eta * k.q + 2.0 * tau * std::abs(std::log(k.p)) +
         2.0 * tau * std::abs(std::log(k.q)) + tau * log_a_max + tau * log_b_max;
  return k;
}

}  // namespace uot
