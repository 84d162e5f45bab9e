#pragma once

#include <cstddef>

#include "iirl/dataset.hpp"
#include "iirl/masking.hpp"
#include "iirl/random.hpp"

namespace iirl {

enum class UtilityFamily { cobb_douglas, log_linear };

/// A generated dataset together with the function that produced it.
struct Generated {
  Dataset data;
  FunctionSpec truth;
};

/// Linear budgets g_t(x) = alpha_t'x - 1 with alpha_t(i) ~ Unif(0.5, 2), and
/// the analytic optimum of one Cobb-Douglas or log-linear utility.
Generated rational_utility_dataset(Rng& rng, std::size_t K, Eigen::Index m, UtilityFamily family);

/// Applies multiplicative Unif(0.5, 1.5) noise to every response and rescales
/// it back onto its budget line, repeating until GARP fails. After half the
/// attempts the expenditure shares are redrawn uniformly instead.
Dataset irrational_utility_dataset(Rng& rng, const Dataset& rational, std::size_t max_attempts = 1000);

/// Cobb-Douglas utilities u_t, a common price vector and thresholds; the
/// responses are the exact optima. `truth` is the budget base p'x.
struct GeneratedStrategy {
  Dataset data;
  FunctionSpec budget;
  std::vector<double> thresholds;
};
GeneratedStrategy rational_strategy_dataset(Rng& rng, std::size_t K, Eigen::Index m);

/// Multiplicative response noise until the transformed GARP test fails.
Dataset irrational_strategy_dataset(Rng& rng, const Dataset& rational, std::size_t max_attempts = 1000);

/// Cobb-Douglas utilities with exponents summing to 0.9 under a linear budget
/// p ~ Unif(1, 2), thresholds ~ Unif(1, 2).
MaskingProblem cobb_douglas_scenario(Rng& rng, std::size_t K, Eigen::Index m, double eta);

/// Separable concave quadratics u(x) = -sum a_i x_i^2 + b'x, increasing on the
/// whole search box, under a linear budget.
MaskingProblem quadratic_scenario(Rng& rng, std::size_t K, Eigen::Index m, double eta);

}  // namespace iirl
