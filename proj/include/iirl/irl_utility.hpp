#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "iirl/dataset.hpp"
#include "iirl/lp.hpp"

namespace iirl {

/// Default strictness tolerance of the revealed-preference relations.
inline constexpr double kGarpTolerance = 1e-9;

using RelationMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct GarpResult {
  bool passes = true;
  /// Shortest index cycle t_0 -> t_1 -> ... -> t_n whose closing step
  /// t_n -> t_0 is strict. 0-based indices.
  std::optional<std::vector<std::size_t>> cycle;
  /// direct(t, s): x_s was affordable when x_t was chosen.
  RelationMatrix direct;
  /// Transitive closure of `direct` (Warshall).
  RelationMatrix closure;
};

/// GARP on a cost matrix cost(t, s) = g_t(x_s): x_t R0 x_s iff
/// cost(t, s) <= tol; fails iff x_t R x_s and cost(s, t) < -tol.
GarpResult garp_from_costs(const Mat& cost, double tol = kGarpTolerance);

/// cost(t, s) = g_t(x_s) for a utility-test dataset.
Mat constraint_costs(const Dataset& d);

GarpResult garp_check(const Dataset& d, double tol = kGarpTolerance,
                      double activity_tol = kActivityTolerance);

struct UtilityReconstruction {
  Vec levels;
  Vec multipliers;
  /// min_t { u_t + lambda_t g_t(x) }
  FunctionSpec envelope;
};

struct AfriatResult {
  FeasibilityResult lp;
  std::optional<UtilityReconstruction> reconstruction;
};

/// Floors applied to every witness variable. The systems are invariant under
/// translating the levels and under jointly scaling levels and multipliers,
/// so a floor of 1 loses no generality.
inline constexpr double kWitnessFloor = 1.0;

/// Variables [u_1..u_K, lambda_1..lambda_K]; rows
/// u_s - u_t - lambda_t cost(t, s) <= 0 for t != s.
LinearFeasibilityProblem afriat_system(const Mat& cost);

AfriatResult afriat_test(const Dataset& d, const FeasibilityOptions& opts = {},
                         double activity_tol = kActivityTolerance);

/// Multipliers lambda_t solving lambda_t grad g_t(x_t) = grad u(x_t).
Vec utility_multipliers(const Dataset& d, const FunctionSpec& u_true);

/// u_best(x) = min_t { u(x_t) + lambda_t g_t(x) }.
FunctionSpec best_utility_estimate(const Dataset& d, const FunctionSpec& u_true);

/// psi_u = max_{j != k} u(x_j) - u(x_k) - lambda_k g_k(x_j). More negative
/// means the data pass the test by a wider margin.
MarginReport margin_utility(const Dataset& d, const FunctionSpec& u_true);

struct Box {
  Vec lower;
  Vec upper;
};

/// Midpoint Riemann sum of (u_true - candidate)^2 over `region` (m <= 2).
double integrated_squared_error(const FunctionSpec& candidate, const FunctionSpec& u_true,
                                const Box& region, std::size_t grid_n);

}  // namespace iirl
