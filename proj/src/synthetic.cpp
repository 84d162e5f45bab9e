#include "iirl/synthetic.hpp"

#include "iirl/errors.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/irl_utility.hpp"

namespace iirl {

namespace {

Vec uniform_vec(Rng& rng, Eigen::Index m, double lo, double hi) {
  Vec v(m);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

Vec jitter(Rng& rng, const Vec& x) {
  Vec y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] *= rng.uniform(0.5, 1.5);
  return y;
}

}  // namespace

Generated rational_utility_dataset(Rng& rng, std::size_t K, Eigen::Index m, UtilityFamily family) {
  Generated g;
  const Vec w = uniform_vec(rng, m, 0.2, 1.0);
  g.truth = family == UtilityFamily::cobb_douglas ? FunctionSpec::cobb_douglas(w / w.sum())
                                                  : FunctionSpec::log_linear(w);
  g.data.mode = DatasetMode::utility_test;
  for (std::size_t t = 0; t < K; ++t) {
    const Vec alpha = uniform_vec(rng, m, 0.5, 2.0);
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = (w[i] / w.sum()) / alpha[i];
    g.data.entries.push_back({FunctionSpec::linear(alpha, -1.0), x});
  }
  return g;
}

Dataset irrational_utility_dataset(Rng& rng, const Dataset& rational, std::size_t max_attempts) {
  for (std::size_t a = 0; a < max_attempts; ++a) {
    Dataset d = rational;
    // Budgets that barely cross resist small jitter; the second half of the
    // attempts redraws the expenditure shares uniformly instead.
    const bool redraw = 2 * a >= max_attempts;
    for (auto& e : d.entries) {
      const Vec alpha = std::get<LinearFn>(e.function.node().params).coeffs;
      const Vec y = redraw ? Vec(rng.dirichlet(alpha.size()).cwiseQuotient(alpha)) : jitter(rng, e.response);
      e.response = y / alpha.dot(y);
    }
    if (!garp_check(d).passes) return d;
  }
  throw ConfigError("synthetic.irrational_utility_dataset",
                    "GARP still holds after " + std::to_string(max_attempts) + " perturbations");
}

GeneratedStrategy rational_strategy_dataset(Rng& rng, std::size_t K, Eigen::Index m) {
  GeneratedStrategy g;
  const Vec p = uniform_vec(rng, m, 1.0, 2.0);
  g.budget = FunctionSpec::linear(p);
  g.data.mode = DatasetMode::strategy_test;
  for (std::size_t t = 0; t < K; ++t) {
    const Vec w = uniform_vec(rng, m, 0.2, 1.0);
    const Vec a = 0.9 * w / w.sum();
    const double gamma = rng.uniform(1.0, 2.0);
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = (a[i] / a.sum()) * gamma / p[i];
    g.data.entries.push_back({FunctionSpec::cobb_douglas(a), x});
    g.thresholds.push_back(gamma);
  }
  return g;
}

Dataset irrational_strategy_dataset(Rng& rng, const Dataset& rational, std::size_t max_attempts) {
  for (std::size_t a = 0; a < max_attempts; ++a) {
    Dataset d = rational;
    for (auto& e : d.entries) e.response = jitter(rng, e.response);
    if (!garp_transformed(d).passes) return d;
  }
  throw ConfigError("synthetic.irrational_strategy_dataset",
                    "transformed GARP still holds after " + std::to_string(max_attempts) + " perturbations");
}

MaskingProblem cobb_douglas_scenario(Rng& rng, std::size_t K, Eigen::Index m, double eta) {
  MaskingProblem p;
  p.budget = FunctionSpec::linear(uniform_vec(rng, m, 1.0, 2.0));
  for (std::size_t t = 0; t < K; ++t) {
    const Vec w = uniform_vec(rng, m, 0.2, 1.0);
    p.utilities.push_back(FunctionSpec::cobb_douglas(0.9 * w / w.sum()));
    p.thresholds.push_back(rng.uniform(1.0, 2.0));
  }
  p.eta = eta;
  return p;
}

MaskingProblem quadratic_scenario(Rng& rng, std::size_t K, Eigen::Index m, double eta) {
  MaskingProblem p;
  const Vec price = uniform_vec(rng, m, 1.0, 2.0);
  p.budget = FunctionSpec::linear(price);
  for (std::size_t t = 0; t < K; ++t) p.thresholds.push_back(rng.uniform(1.0, 2.0));
  for (std::size_t t = 0; t < K; ++t) {
    const Vec a = uniform_vec(rng, m, 0.1, 0.5);
    Vec b(m);
    // Gradient b_i - 2 a_i x_i stays positive up to x_i = 2 * 2 / p_i.
    for (Eigen::Index i = 0; i < m; ++i) b[i] = 2.0 * a[i] * (4.0 / price[i]) + rng.uniform(0.5, 1.5);
    p.utilities.push_back(FunctionSpec::quadratic(Mat((-a).asDiagonal()), b));
  }
  p.eta = eta;
  return p;
}

}  // namespace iirl
