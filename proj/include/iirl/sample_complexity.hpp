#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "iirl/masking.hpp"

namespace iirl {

/// Gaussian linear perturbation delta ~ N(0, covariance) of every utility.
struct NoiseModel {
  Mat covariance;
  std::uint64_t seed = 0;

  static NoiseModel isotropic(Eigen::Index m, double sigma2, std::uint64_t seed);
  bool is_isotropic() const;
  double trace() const { return covariance.trace(); }
};

/// Throws ConfigError unless the covariance is symmetric PSD with positive trace.
void validate_noise(const NoiseModel& noise);

/// Draws one delta per time step from the noise model's stream `stream`.
std::vector<Vec> draw_perturbations(const NoiseModel& noise, std::size_t K, std::uint64_t stream);

/// u(x) + delta'x. Linear and quadratic utilities stay in their own kind.
FunctionSpec perturb_utility(const FunctionSpec& u, const Vec& delta);

/// Which masked quantities enter the error event.
enum class ErrorForm {
  /// The decision maker masks against noisy utilities; the resulting
  /// responses and thresholds are scored with the true utilities.
  appendix,
  /// Noiseless masking output scored with the noisy utilities.
  literal,
};

const char* to_string(ErrorForm f);
ErrorForm error_form_from_string(const std::string& s);

struct TrialOutcome {
  std::size_t id = 0;
  bool valid = false;
  bool exceed = false;
  double margin = 0.0;
  /// Range of the pair terms and the curvature ratio observed in the trial.
  double spread = 0.0;
  double kappa = 0.0;
  std::string error;
};

struct Constants {
  double L = 0.0;
  double delta_max = 0.0;
  double kappa = 0.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct NoiseStudy {
  ErrorForm form = ErrorForm::appendix;
  std::vector<TrialOutcome> trials;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  std::size_t n_exceed = 0;
  double p_err = 0.0;
  Interval wilson;
  double psi_true = 0.0;
  double target = 0.0;
  Constants constants;
  double safety = 1.1;
  double bound = 0.0;
  /// Bound with every constant multiplied by `safety`.
  double bound_with_safety = 0.0;
  /// The variance identity behind the bound is exact only for isotropic noise.
  bool bound_heuristic = false;
};

struct StudyOptions {
  ErrorForm form = ErrorForm::appendix;
  double safety = 1.1;
  std::size_t lipschitz_pairs = 4000;
  /// Fraction of invalid trials above which the study is rejected.
  double max_invalid_fraction = 0.1;
};

NoiseStudy empirical_error_probability(const MaskingProblem& scenario, const NoiseModel& noise,
                                       std::size_t n_trials, const StudyOptions& opts = {});

/// Largest ||grad u_t(x) - grad u_t(y)|| / ||x - y|| over random pairs in the
/// feasible box of the largest search threshold: the smoothness constant.
double estimate_gradient_lipschitz(const std::vector<FunctionSpec>& utilities,
                                   const FunctionSpec& budget, double gamma_max,
                                   std::size_t n_pairs, std::uint64_t seed);

/// max_{j != k} eps_{j,k} - min_{j != k} eps_{j,k}.
double pair_term_spread(const std::vector<Vec>& responses, const std::vector<FunctionSpec>& utilities,
                        const std::vector<double>& thresholds, const FunctionSpec& budget);

/// [max_k ||grad u_k(x_k)||^2 / ||grad g(x_k)||] / [min_{j != k} ||grad u_k(x_k) - grad u_k(x_j)||^2].
/// Throws KappaDegenerate when a gradient difference vanishes.
double curvature_ratio(const std::vector<Vec>& responses, const std::vector<FunctionSpec>& utilities,
                       const FunctionSpec& budget);

/// L, Delta_max and kappa from `n_samples` noisy masking runs.
Constants estimate_constants(const MaskingProblem& scenario, const NoiseModel& noise,
                             std::size_t n_samples, const StudyOptions& opts = {});

double standard_normal_cdf(double x);

/// Phi(2 L Delta_max kappa / sqrt(Tr Sigma))^K.
double analytic_bound(double L, double delta_max, double kappa, const Mat& covariance, std::size_t K);

/// Wilson score interval for `successes` out of `n` at z (default 95%).
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

}  // namespace iirl
