#pragma once

#include <optional>
#include <vector>

#include "iirl/dataset.hpp"
#include "iirl/irl_utility.hpp"
#include "iirl/lp.hpp"

namespace iirl {

struct BudgetReconstruction {
  Vec thresholds;
  Vec multipliers;
  /// max_t { gbar_t + lambda_t (u_t(x) - u_t(x_t)) }. Budget t is
  /// {x : envelope(x) <= thresholds[t]}: one base shared by every t.
  FunctionSpec envelope;
};

struct StrategyResult {
  FeasibilityResult lp;
  std::optional<BudgetReconstruction> reconstruction;
};

/// cost(t, s) = u_t(x_t) - u_t(x_s): the constraint functions of the
/// transformed utility-test dataset.
Mat transformed_costs(const Dataset& d);

/// Variables [gbar_1..gbar_K, lambda_1..lambda_K]; rows
/// gbar_t - gbar_s + lambda_t (u_t(x_s) - u_t(x_t)) <= 0 for t != s.
LinearFeasibilityProblem strategy_system(const Dataset& d);

StrategyResult strategy_feasibility_test(const Dataset& d,
                                         const FeasibilityOptions& opts = {});

/// GARP on the transformed data {u_t(x_t) - u_t(.), x_t}. Activity holds by
/// construction, so no activity tolerance applies.
GarpResult garp_transformed(const Dataset& d, double tol = kGarpTolerance);

/// lambda_t solving lambda_t grad u_t(x_t) = grad g(x_t).
Vec budget_multipliers(const std::vector<Vec>& responses,
                       const std::vector<FunctionSpec>& utilities, const FunctionSpec& g_true);

/// g_best(x) = max_t { gamma_t + lambda_t (u_t(x) - u_t(x_t)) }.
FunctionSpec best_budget_estimate(const Dataset& d, const FunctionSpec& g_true,
                                  const std::vector<double>& thresholds);

/// psi_g = min_{j != k} g(x_j) - g(x_k) - lambda_k (u_k(x_j) - u_k(x_k)).
/// With thresholds, the report also carries the threshold form
/// gamma_j - gamma_k - lambda_k (...). Larger psi_g = wider pass.
MarginReport margin_strategy(const std::vector<Vec>& responses,
                             const std::vector<FunctionSpec>& utilities,
                             const std::vector<double>& thresholds, const FunctionSpec& g_true);

/// Strategy-test dataset from parallel response and utility lists.
Dataset strategy_dataset(const std::vector<Vec>& responses,
                         const std::vector<FunctionSpec>& utilities);

}  // namespace iirl
