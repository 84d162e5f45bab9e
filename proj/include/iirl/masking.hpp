#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iirl/dataset.hpp"
#include "iirl/maximize.hpp"

namespace iirl {

/// Inner argmax settings for masking. Tighter than the maximizer default
/// because the threshold search differentiates responses numerically.
inline MaximizeOptions masking_inner_defaults() {
  MaximizeOptions o;
  o.kkt_tol = 1e-10;
  o.max_iters = 20000;
  o.n_starts = 4;
  return o;
}

struct MaskingOptions {
  MaximizeOptions inner = masking_inner_defaults();
  /// A response whose solver stalls above inner.kkt_tol is still accepted
  /// below this residual.
  double accept_residual = 1e-6;
  /// Pairs (j, k) solved exactly, ranked by a first-order cost estimate.
  std::size_t candidate_pairs = 12;
  /// Thresholds are searched in (lower_fraction * gamma_t, upper_factor * gamma_t].
  double lower_fraction = 1e-6;
  double upper_factor = 2.0;
  /// Budget of boundary-following polish evaluations per pair; 0 disables.
  std::size_t polish_evals = 60;
  /// Slack of the margin constraint check.
  double check_slack = 1e-6;
};

struct MaskingProblem {
  std::vector<FunctionSpec> utilities;
  FunctionSpec budget;
  std::vector<double> thresholds;
  double eta = 0.0;
  MaskingOptions options;

  std::size_t horizon() const { return utilities.size(); }
};

/// Throws on a malformed problem (K < 2, eta outside [0, 1], ...).
void validate_problem(const MaskingProblem& p);

struct NaiveSolution {
  std::vector<OptimumPoint> responses;
  /// Threshold-form strategy margin of the naive data.
  double psi_true = 0.0;
  MarginReport margin;
};

struct MaskingResult {
  std::vector<Vec> naive_responses;
  double psi_true = 0.0;
  std::vector<double> thresholds;
  std::vector<double> masked_thresholds;
  std::vector<Vec> masked_responses;
  double psi_masked = 0.0;
  double target = 0.0;
  /// sum_t (gamma*_t - gamma_t)^2, and its square root.
  double objective = 0.0;
  double violation_norm = 0.0;
  bool feasible = false;
  /// The pair (j, k) whose term was pushed to the target; 0-based.
  std::optional<std::pair<std::size_t, std::size_t>> pair;
  std::vector<std::string> warnings;
};

/// beta*_t = argmax u_t s.t. g <= gamma_t, and the margin they attain.
NaiveSolution naive_responses(const MaskingProblem& p);

/// Minimal threshold violation pushing the strategy margin to at most
/// (1 - eta) psi_true.
///
/// The margin is a minimum of pair terms eps_{j,k}, each depending on
/// (gamma_j, gamma_k) only, so the feasible set is a union of cylinders and
/// the optimum perturbs exactly one pair. Each pair is a two-variable problem
/// solved by Gauss-Newton projection onto eps_{j,k} = target, made feasible
/// along its ray and polished by a compass search over the ray angle.
MaskingResult mask_strategy(const MaskingProblem& p);

struct CurvePoint {
  double eta = 0.0;
  bool ok = false;
  double violation_norm = 0.0;
  double objective = 0.0;
  double psi_true = 0.0;
  double psi_masked = 0.0;
  std::string error;
  /// Full result when ok.
  std::optional<MaskingResult> result;
};

/// One masking run per eta, sharing the naive solve and response cache.
/// Runs go from the largest eta down, and every pair solution found stays
/// available to later (looser) targets, so the curve is nondecreasing in eta.
/// Failures are recorded per point instead of aborting.
std::vector<CurvePoint> violation_curve(const MaskingProblem& p, const std::vector<double>& etas);

struct MaskingCheck {
  bool ok = false;
  double psi_true = 0.0;
  double psi_masked = 0.0;
  double target = 0.0;
};

/// Recomputes both margins from the stored responses and thresholds.
MaskingCheck verify_masking(const MaskingResult& r, const MaskingProblem& p);

/// Threshold-form margin of fresh argmax responses at `thresholds`.
double margin_at_thresholds(const MaskingProblem& p, const std::vector<double>& thresholds,
                            std::vector<Vec>* responses = nullptr);

/// Scenario files: {"schema": "iirl-scenario", "version": 1, "eta", "budget",
/// "thresholds", "utilities", optional "solver"}.
nlohmann::json scenario_to_json(const MaskingProblem& p);
MaskingProblem scenario_from_json(const nlohmann::json& j);
MaskingProblem load_scenario(const std::string& path);
void save_scenario(const MaskingProblem& p, const std::string& path);

}  // namespace iirl
