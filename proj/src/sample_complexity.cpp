#include "iirl/sample_complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iirl/errors.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/random.hpp"

namespace iirl {

namespace {

constexpr const char* kWhere = "sample_complexity";

double threshold_margin(const std::vector<Vec>& xs, const std::vector<FunctionSpec>& us,
                        const std::vector<double>& gammas, const FunctionSpec& g) {
  return *margin_strategy(xs, us, gammas, g).threshold_value;
}

MaskingProblem with_utilities(const MaskingProblem& p, std::vector<FunctionSpec> us) {
  MaskingProblem q = p;
  q.utilities = std::move(us);
  return q;
}

std::vector<FunctionSpec> perturbed(const MaskingProblem& p, const std::vector<Vec>& deltas) {
  std::vector<FunctionSpec> out;
  for (std::size_t t = 0; t < p.horizon(); ++t) out.push_back(perturb_utility(p.utilities[t], deltas[t]));
  return out;
}

struct Draw {
  MaskingResult masked;
  std::vector<FunctionSpec> noisy;
};

// One noisy I-IRL run: the decision maker masks against u_t + delta_t'x.
Draw noisy_run(const MaskingProblem& p, const NoiseModel& noise, std::uint64_t stream) {
  Draw d;
  d.noisy = perturbed(p, draw_perturbations(noise, p.horizon(), stream));
  d.masked = mask_strategy(with_utilities(p, d.noisy));
  return d;
}

}  // namespace

NoiseModel NoiseModel::isotropic(Eigen::Index m, double sigma2, std::uint64_t seed) {
  return {sigma2 * Mat::Identity(m, m), seed};
}

bool NoiseModel::is_isotropic() const {
  const double s = covariance.size() ? covariance(0, 0) : 0.0;
  return covariance.isApprox(s * Mat::Identity(covariance.rows(), covariance.cols()), 1e-12);
}

void validate_noise(const NoiseModel& noise) {
  const Mat& S = noise.covariance;
  if (S.rows() == 0 || S.rows() != S.cols())
    throw ConfigError(kWhere, "noise covariance must be square and nonempty");
  if (!S.allFinite() || !S.isApprox(S.transpose(), 1e-12))
    throw ConfigError(kWhere, "noise covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw ConfigError(kWhere, "noise covariance must be positive semidefinite");
  if (!(S.trace() > 0.0)) throw ConfigError(kWhere, "noise covariance must have positive trace");
}

std::vector<Vec> draw_perturbations(const NoiseModel& noise, std::size_t K, std::uint64_t stream) {
  Eigen::SelfAdjointEigenSolver<Mat> es(noise.covariance);
  const Mat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Rng rng = Rng::stream(noise.seed, stream);
  std::vector<Vec> out;
  const Eigen::Index m = noise.covariance.rows();
  for (std::size_t t = 0; t < K; ++t) {
    Vec z(m);
    for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.normal();
    out.push_back(root * z);
  }
  return out;
}

FunctionSpec perturb_utility(const FunctionSpec& u, const Vec& delta) {
  if (delta.size() != u.dimension()) throw SchemaError(kWhere, "perturbation dimension mismatch");
  switch (u.kind()) {
    case FunctionKind::linear: {
      const auto& f = std::get<LinearFn>(u.node().params);
      return FunctionSpec::linear(f.coeffs + delta, f.offset);
    }
    case FunctionKind::quadratic: {
      const auto& f = std::get<QuadraticFn>(u.node().params);
      return FunctionSpec::quadratic(f.A, f.b + delta, f.c);
    }
    default:
      return FunctionSpec::affine(u, 1.0, delta, 0.0);
  }
}

const char* to_string(ErrorForm f) { return f == ErrorForm::appendix ? "appendix" : "literal"; }

ErrorForm error_form_from_string(const std::string& s) {
  if (s == "appendix") return ErrorForm::appendix;
  if (s == "literal") return ErrorForm::literal;
  throw ConfigError(kWhere, "unknown error form '" + s + "' (expected appendix or literal)");
}

double estimate_gradient_lipschitz(const std::vector<FunctionSpec>& utilities,
                                   const FunctionSpec& budget, double gamma_max,
                                   std::size_t n_pairs, std::uint64_t seed) {
  const Vec box = feasible_box(budget, gamma_max);
  Rng rng(seed);
  const Eigen::Index m = box.size();
  auto sample = [&] {
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = rng.uniform(0.0, box[i]);
    return x;
  };
  double L = 0.0;
  for (std::size_t s = 0; s < n_pairs; ++s) {
    const Vec x = sample(), y = sample();
    const double dist = (x - y).norm();
    if (!(dist > 0.0)) continue;
    for (const auto& u : utilities) {
      const double ratio = (u.gradient(x) - u.gradient(y)).norm() / dist;
      if (std::isfinite(ratio)) L = std::max(L, ratio);
    }
  }
  return L;
}

double pair_term_spread(const std::vector<Vec>& responses, const std::vector<FunctionSpec>& utilities,
                        const std::vector<double>& thresholds, const FunctionSpec& budget) {
  const MarginReport r = margin_strategy(responses, utilities, thresholds, budget);
  const Mat& terms = *r.threshold_terms;
  return off_diagonal_extremum(terms, true) - off_diagonal_extremum(terms, false);
}

double curvature_ratio(const std::vector<Vec>& responses, const std::vector<FunctionSpec>& utilities,
                       const FunctionSpec& budget) {
  const std::size_t K = responses.size();
  double numerator = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double gnorm = budget.gradient(responses[k]).norm();
    if (!(gnorm > 0.0))
      throw KappaDegenerate("sample_complexity.estimate_constants",
                            "budget gradient vanishes at t=" + std::to_string(k));
    numerator = std::max(numerator, utilities[k].gradient(responses[k]).squaredNorm() / gnorm);
  }
  double denominator = std::numeric_limits<double>::infinity();
  std::size_t arg_j = 0, arg_k = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const Vec own = utilities[k].gradient(responses[k]);
    for (std::size_t j = 0; j < K; ++j) {
      if (j == k) continue;
      const double d = (own - utilities[k].gradient(responses[j])).squaredNorm();
      if (d < denominator) {
        denominator = d;
        arg_j = j;
        arg_k = k;
      }
    }
  }
  if (!(denominator > 0.0))
    throw KappaDegenerate("sample_complexity.estimate_constants",
                          "gradient difference vanishes for pair (j=" + std::to_string(arg_j) +
                              ", k=" + std::to_string(arg_k) + ")");
  return numerator / denominator;
}

Constants estimate_constants(const MaskingProblem& scenario, const NoiseModel& noise,
                             std::size_t n_samples, const StudyOptions& opts) {
  if (n_samples < 1) throw ConfigError(kWhere, "n_samples must be at least 1");
  validate_noise(noise);
  Constants c;
  const double gamma_max =
      scenario.options.upper_factor * *std::max_element(scenario.thresholds.begin(), scenario.thresholds.end());
  c.L = estimate_gradient_lipschitz(scenario.utilities, scenario.budget, gamma_max, opts.lipschitz_pairs,
                                    mix_seed(noise.seed, 0xC0FFEE));
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Draw d = noisy_run(scenario, noise, s);
    c.delta_max = std::max(c.delta_max, pair_term_spread(d.masked.masked_responses, d.noisy,
                                                         d.masked.masked_thresholds, scenario.budget));
    c.kappa = std::max(c.kappa, curvature_ratio(d.masked.masked_responses, scenario.utilities, scenario.budget));
  }
  return c;
}

NoiseStudy empirical_error_probability(const MaskingProblem& scenario, const NoiseModel& noise,
                                       std::size_t n_trials, const StudyOptions& opts) {
  if (n_trials < 1) throw ConfigError(kWhere, "n_trials must be at least 1");
  validate_noise(noise);
  validate_problem(scenario);
  if (noise.covariance.rows() != scenario.budget.dimension())
    throw SchemaError(kWhere, "noise dimension differs from the response dimension");

  NoiseStudy study;
  study.form = opts.form;
  study.safety = opts.safety;
  study.bound_heuristic = !noise.is_isotropic();

  const MaskingResult clean = mask_strategy(scenario);
  study.psi_true = clean.psi_true;
  study.target = (1.0 - scenario.eta) * clean.psi_true;

  const double gamma_max =
      scenario.options.upper_factor * *std::max_element(scenario.thresholds.begin(), scenario.thresholds.end());
  study.constants.L = estimate_gradient_lipschitz(scenario.utilities, scenario.budget, gamma_max,
                                                  opts.lipschitz_pairs, mix_seed(noise.seed, 0xC0FFEE));

  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialOutcome o;
    o.id = i;
    try {
      if (opts.form == ErrorForm::appendix) {
        const Draw d = noisy_run(scenario, noise, i);
        const auto& xs = d.masked.masked_responses;
        const auto& gs = d.masked.masked_thresholds;
        o.margin = threshold_margin(xs, scenario.utilities, gs, scenario.budget);
        o.spread = pair_term_spread(xs, d.noisy, gs, scenario.budget);
        o.kappa = curvature_ratio(xs, scenario.utilities, scenario.budget);
      } else {
        const auto noisy = perturbed(scenario, draw_perturbations(noise, scenario.horizon(), i));
        const auto& xs = clean.masked_responses;
        const auto& gs = clean.masked_thresholds;
        o.margin = threshold_margin(xs, noisy, gs, scenario.budget);
        o.spread = pair_term_spread(xs, noisy, gs, scenario.budget);
        o.kappa = curvature_ratio(xs, scenario.utilities, scenario.budget);
      }
      o.valid = std::isfinite(o.margin);
      if (!o.valid) o.error = "non-finite margin";
    } catch (const KappaDegenerate&) {
      throw;
    } catch (const Error& e) {
      o.error = e.what();
    }
    o.exceed = o.valid && o.margin >= study.target;
    if (o.valid) {
      ++study.n_valid;
      if (o.exceed) ++study.n_exceed;
      study.constants.delta_max = std::max(study.constants.delta_max, o.spread);
      study.constants.kappa = std::max(study.constants.kappa, o.kappa);
    } else {
      ++study.n_invalid;
    }
    study.trials.push_back(std::move(o));
  }

  if (static_cast<double>(study.n_invalid) > opts.max_invalid_fraction * static_cast<double>(n_trials))
    throw StudyUnreliable(kWhere, std::to_string(study.n_invalid) + " of " + std::to_string(n_trials) +
                                      " trials failed");
  if (study.n_valid == 0) throw StudyUnreliable(kWhere, "no valid trials");
  study.p_err = static_cast<double>(study.n_exceed) / static_cast<double>(study.n_valid);
  study.wilson = wilson_interval(study.n_exceed, study.n_valid);
  const std::size_t K = scenario.horizon();
  const Constants& c = study.constants;
  study.bound = analytic_bound(c.L, c.delta_max, c.kappa, noise.covariance, K);
  const double s = opts.safety;
  study.bound_with_safety = analytic_bound(s * c.L, s * c.delta_max, s * c.kappa, noise.covariance, K);
  return study;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double analytic_bound(double L, double delta_max, double kappa, const Mat& covariance, std::size_t K) {
  if (K < 1) throw ConfigError("sample_complexity.analytic_bound", "K must be at least 1");
  if (L < 0.0 || delta_max < 0.0 || kappa < 0.0)
    throw ConfigError("sample_complexity.analytic_bound", "constants must be nonnegative");
  const double tr = covariance.trace();
  if (!(tr > 0.0))
    throw ConfigError("sample_complexity.analytic_bound", "Tr(Sigma) = 0: the bound divides by zero");
  const double arg = 2.0 * L * delta_max * kappa / std::sqrt(tr);
  return std::pow(standard_normal_cdf(arg), static_cast<double>(K));
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw ConfigError("sample_complexity.wilson_interval", "n must be positive");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace iirl
