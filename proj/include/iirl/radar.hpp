#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iirl/masking.hpp"
#include "iirl/random.hpp"

namespace iirl {

/// Sampling parameters of the radar case study. Defaults are the published
/// values; thresholds are the one free choice (drawn uniformly). Budgets
/// near 1 keep SINR in its convex region around the origin, where the naive
/// margin is negative, so the default range sits where SINR saturates.
struct RadarConfig {
  std::size_t K = 100;
  Eigen::Index m = 6;
  std::uint64_t seed = 0;
  double q_diag = 5.0;
  double p_diag_lo = 1.0;
  double p_diag_hi = 3.0;
  double p_off = -0.05;
  double zeta = 1.0;
  double price_lo = 1.0;
  double price_hi = 4.0;
  double gamma_lo = 20.0;
  double gamma_hi = 40.0;
  std::vector<double> etas = default_etas();
  /// Adds an eta = 0 row ahead of the grid.
  bool prepend_zero = true;
  MaskingOptions masking = default_masking();
  std::size_t monotonicity_pairs = 1000;

  static std::vector<double> default_etas();
  static MaskingOptions default_masking();
};

struct RadarScenario {
  Mat Q;
  /// Interference matrix P(alpha_t) per time step; the probe itself is not stored.
  std::vector<Mat> P;
  double zeta = 1.0;
  Vec price;
  std::vector<double> thresholds;

  std::size_t horizon() const { return P.size(); }
  Eigen::Index dimension() const { return Q.rows(); }
};

/// Throws unless Q and every P_t are symmetric positive definite, zeta > 0, p > 0.
void validate_scenario(const RadarScenario& s);

/// beta'Q beta / (beta'P beta + zeta).
double sinr(const Mat& Q, const Mat& P, double zeta, const Vec& beta);
FunctionSpec sinr_function(const Mat& Q, const Mat& P, double zeta);

/// argmax SINR_t(beta) s.t. p'beta <= gamma.
OptimumPoint radar_response(const RadarScenario& s, std::size_t t, double gamma,
                            const MaximizeOptions& opts = {});

/// Draws a scenario; each P_t is resampled until Cholesky succeeds.
RadarScenario sample_scenario(const RadarConfig& config, Rng& rng);

MaskingProblem radar_masking_problem(const RadarScenario& s, double eta, const MaskingOptions& opts);

struct MonotonicityReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Largest SINR drop seen along a componentwise increase.
  double worst_drop = 0.0;
  bool flagged() const { return violations > 0; }
};

/// Compares SINR at random pairs x <= y inside the feasible box.
MonotonicityReport monotonicity_spot_check(const RadarScenario& s, std::size_t n_pairs,
                                           std::uint64_t seed);

struct Fig2Result {
  RadarScenario scenario;
  std::vector<CurvePoint> curve;
  MonotonicityReport monotonicity;
  /// Rank correlation of violation against eta over the points with eta > 0.
  double spearman = 0.0;
  /// spearman >= 0.95 and violation at the largest eta exceeds that at the smallest.
  bool trend_ok = false;
};

Fig2Result run_fig2_experiment(const RadarConfig& config);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

/// lo, lo + step, ..., up to hi inclusive (with a half-step tolerance).
std::vector<double> eta_grid(double lo, double hi, double step);

}  // namespace iirl
