#include "iirl/radar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iirl/errors.hpp"

namespace iirl {

namespace {

bool positive_definite(const Mat& M) {
  if (!M.isApprox(M.transpose(), 1e-12)) return false;
  Eigen::LLT<Mat> llt(M);
  return llt.info() == Eigen::Success;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::vector<double> RadarConfig::default_etas() { return eta_grid(0.05, 0.95, 0.05); }

MaskingOptions RadarConfig::default_masking() {
  MaskingOptions o;
  o.inner.kkt_tol = 1e-9;
  o.inner.n_starts = 3;
  o.candidate_pairs = 6;
  o.polish_evals = 12;
  return o;
}

void validate_scenario(const RadarScenario& s) {
  constexpr const char* kWhere = "radar.RadarScenario";
  const Eigen::Index m = s.dimension();
  if (m < 1 || s.Q.cols() != m) throw SchemaError(kWhere, "Q must be square");
  if (!positive_definite(s.Q)) throw ConfigError(kWhere, "Q must be symmetric positive definite");
  if (s.P.empty()) throw ConfigError(kWhere, "at least one interference matrix required");
  for (std::size_t t = 0; t < s.P.size(); ++t) {
    if (s.P[t].rows() != m || s.P[t].cols() != m)
      throw SchemaError(kWhere, "P_" + std::to_string(t) + " has the wrong shape");
    if (!positive_definite(s.P[t]))
      throw ConfigError(kWhere, "P_" + std::to_string(t) + " must be symmetric positive definite");
  }
  if (!(s.zeta > 0.0)) throw ConfigError(kWhere, "noise power zeta must be positive");
  if (s.price.size() != m || !(s.price.array() > 0.0).all())
    throw ConfigError(kWhere, "prices must be positive, one per channel");
  if (s.thresholds.size() != s.P.size())
    throw SchemaError(kWhere, "one threshold per time step required");
}

double sinr(const Mat& Q, const Mat& P, double zeta, const Vec& beta) {
  if (Q.rows() != beta.size() || P.rows() != beta.size())
    throw SchemaError("radar.sinr", "dimension mismatch");
  return beta.dot(Q * beta) / (beta.dot(P * beta) + zeta);
}

FunctionSpec sinr_function(const Mat& Q, const Mat& P, double zeta) {
  return FunctionSpec::quadratic_fractional(Q, P, zeta);
}

OptimumPoint radar_response(const RadarScenario& s, std::size_t t, double gamma,
                            const MaximizeOptions& opts) {
  return maximize_concave(sinr_function(s.Q, s.P.at(t), s.zeta), FunctionSpec::linear(s.price), gamma,
                          opts);
}

RadarScenario sample_scenario(const RadarConfig& c, Rng& rng) {
  constexpr const char* kWhere = "radar.sample_scenario";
  if (c.K < 1 || c.m < 1) throw ConfigError(kWhere, "K and m must be positive");
  if (!(c.p_diag_lo <= c.p_diag_hi) || !(c.price_lo > 0.0) || !(c.price_lo <= c.price_hi) ||
      !(c.gamma_lo > 0.0) || !(c.gamma_lo <= c.gamma_hi))
    throw ConfigError(kWhere, "sampling ranges must be ordered and positive");
  RadarScenario s;
  s.Q = c.q_diag * Mat::Identity(c.m, c.m);
  s.zeta = c.zeta;
  s.price.resize(c.m);
  for (Eigen::Index i = 0; i < c.m; ++i) s.price[i] = rng.uniform(c.price_lo, c.price_hi);
  for (std::size_t t = 0; t < c.K; ++t) {
    Mat P;
    int tries = 0;
    do {
      if (++tries > 100)
        throw ConfigError(kWhere, "interference matrix " + std::to_string(t) +
                                      " not positive definite after 100 draws");
      P = Mat::Constant(c.m, c.m, c.p_off);
      for (Eigen::Index i = 0; i < c.m; ++i) P(i, i) = rng.uniform(c.p_diag_lo, c.p_diag_hi);
    } while (!positive_definite(P));
    s.P.push_back(std::move(P));
  }
  for (std::size_t t = 0; t < c.K; ++t) s.thresholds.push_back(rng.uniform(c.gamma_lo, c.gamma_hi));
  validate_scenario(s);
  return s;
}

MaskingProblem radar_masking_problem(const RadarScenario& s, double eta, const MaskingOptions& opts) {
  MaskingProblem p;
  for (const Mat& P : s.P) p.utilities.push_back(sinr_function(s.Q, P, s.zeta));
  p.budget = FunctionSpec::linear(s.price);
  p.thresholds = s.thresholds;
  p.eta = eta;
  p.options = opts;
  return p;
}

MonotonicityReport monotonicity_spot_check(const RadarScenario& s, std::size_t n_pairs,
                                           std::uint64_t seed) {
  MonotonicityReport r;
  Rng rng(seed);
  const Eigen::Index m = s.dimension();
  const double gamma_max = *std::max_element(s.thresholds.begin(), s.thresholds.end());
  for (std::size_t n = 0; n < n_pairs; ++n) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform() * static_cast<double>(s.horizon()));
    Vec x(m), y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double top = gamma_max / s.price[i];
      x[i] = rng.uniform(0.0, top);
      y[i] = x[i] + rng.uniform(0.0, top);
    }
    const Mat& P = s.P[std::min(t, s.horizon() - 1)];
    const double drop = sinr(s.Q, P, s.zeta, x) - sinr(s.Q, P, s.zeta, y);
    ++r.checked;
    if (drop > 1e-12) {
      ++r.violations;
      r.worst_drop = std::max(r.worst_drop, drop);
    }
  }
  return r;
}

Fig2Result run_fig2_experiment(const RadarConfig& config) {
  Fig2Result out;
  Rng rng(config.seed);
  out.scenario = sample_scenario(config, rng);
  out.monotonicity = monotonicity_spot_check(out.scenario, config.monotonicity_pairs,
                                             mix_seed(config.seed, 1));
  std::vector<double> etas;
  if (config.prepend_zero) etas.push_back(0.0);
  etas.insert(etas.end(), config.etas.begin(), config.etas.end());
  MaskingOptions opts = config.masking;
  opts.inner.seed = mix_seed(config.seed, 2);
  const MaskingProblem problem = radar_masking_problem(out.scenario, 0.0, opts);
  out.curve = violation_curve(problem, etas);

  std::vector<double> xs, ys;
  for (const auto& c : out.curve)
    if (c.ok && c.eta > 0.0) {
      xs.push_back(c.eta);
      ys.push_back(c.violation_norm);
    }
  if (xs.size() >= 2) {
    out.spearman = spearman_correlation(xs, ys);
    out.trend_ok = out.spearman >= 0.95 && ys.back() > ys.front();
  }
  return out;
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConfigError("radar.spearman_correlation", "need two equally long series of length >= 2");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> eta_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("radar.eta_grid", "need step > 0 and hi >= lo");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 0.5 * step * 1e-6) break;
    out.push_back(std::round(v * 1e12) / 1e12);
  }
  return out;
}

}  // namespace iirl
