#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "iirl/function.hpp"

namespace iirl {

/// Default absolute tolerance for "the constraint is active at beta_t".
inline constexpr double kActivityTolerance = 1e-6;

enum class DatasetMode {
  /// Known constraints g_t, observed responses: the utility-maximization test.
  utility_test,
  /// Known utilities u_t, observed responses: the budget (strategy) test.
  strategy_test,
};

const char* to_string(DatasetMode mode);
DatasetMode dataset_mode_from_string(const std::string& s);

/// One time step: the probe-controlled function (g_t or u_t) and the response.
struct Observation {
  FunctionSpec function;
  Vec response;
};

struct Dataset {
  DatasetMode mode = DatasetMode::utility_test;
  std::vector<Observation> entries;

  std::size_t horizon() const { return entries.size(); }
  Eigen::Index dimension() const {
    return entries.empty() ? 0 : entries.front().response.size();
  }
  const Vec& response(std::size_t t) const { return entries[t].response; }
  const FunctionSpec& function(std::size_t t) const { return entries[t].function; }
};

bool operator==(const Dataset& a, const Dataset& b);

/// A common base g with per-time thresholds: {x >= 0 : g(x) <= gamma_t}.
struct BudgetSpec {
  FunctionSpec base;
  std::vector<double> thresholds;
};

struct Violation {
  std::optional<std::size_t> index;
  std::string field;
  double magnitude = 0.0;
  std::string message;
};

/// Every invariant violation of `d`; empty means the dataset is valid at `tol`.
std::vector<Violation> validate_dataset(const Dataset& d,
                                        double tol = kActivityTolerance);

/// Throws ValidationError summarising the violations, if any.
void require_valid(const Dataset& d, double tol, const std::string& where);

std::vector<Violation> validate_budget(const BudgetSpec& b);

/// Extremal off-diagonal slack of a revealed-preference inequality system.
struct MarginReport {
  double value = 0.0;
  /// K x K pair terms; the diagonal is NaN and never enters the extremum.
  Mat pair_terms;
  Vec multipliers;
  std::size_t arg_j = 0;
  std::size_t arg_k = 0;
  /// Threshold form (gamma_j - gamma_k - ...) of the strategy margin, when
  /// thresholds were supplied. Coincides with `value` under active constraints.
  std::optional<double> threshold_value;
  std::optional<Mat> threshold_terms;
};

/// Recomputes the extremum of the off-diagonal entries of `terms`.
double off_diagonal_extremum(const Mat& terms, bool take_max,
                             std::size_t* arg_j = nullptr,
                             std::size_t* arg_k = nullptr);

struct KktMultiplier {
  double lambda = 0.0;
  /// Set when lambda <= 0, i.e. the data contradict monotonicity.
  bool non_monotone = false;
};

/// Least-squares scalar solving lambda * grad_source ~= grad_target.
KktMultiplier kkt_multiplier(const Vec& grad_target, const Vec& grad_source);

/// Same, restricted to the coordinates where `point` is positive. At a
/// response on a face of the orthant the nonnegativity multipliers absorb the
/// off-support gradient components, so only the support carries the
/// collinearity relation. Reduces to kkt_multiplier at interior points.
KktMultiplier kkt_multiplier_on_support(const Vec& grad_target,
                                        const Vec& grad_source,
                                        const Vec& point,
                                        double support_tol = 1e-9);

}  // namespace iirl
