#include "iirl/maximize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iirl/errors.hpp"
#include "iirl/random.hpp"

namespace iirl {

namespace {

constexpr const char* kWhere = "optim.maximize_concave";

const LinearFn* as_linear(const FunctionSpec& f) {
  return f.kind() == FunctionKind::linear ? &std::get<LinearFn>(f.node().params) : nullptr;
}

bool positive(const Vec& v) { return (v.array() > 0.0).all(); }

// Projection of y onto {x >= 0 : p'x <= budget} for p > 0, by walking the
// sorted breakpoints of mu -> sum_i p_i max(0, y_i - mu p_i).
Vec project_halfspace_orthant(const Vec& p, double budget, const Vec& y) {
  Vec x = y.cwiseMax(0.0);
  if (p.dot(x) <= budget) return x;
  if (budget < 0.0) throw InfeasibleRegion(kWhere, "budget set is empty");
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return y[a] / p[a] > y[b] / p[b];
  });
  double spy = 0.0, spp = 0.0;
  double mu = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Eigen::Index i = order[k];
    spy += p[i] * y[i];
    spp += p[i] * p[i];
    mu = (spy - budget) / spp;
    const double next = k + 1 < order.size() ? y[order[k + 1]] / p[order[k + 1]] : 0.0;
    if (mu >= next) break;
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) x[i] = std::max(0.0, y[i] - mu * p[i]);
  return x;
}

// argmin_{x >= 0} 0.5||x - y||^2 + mu g(x) by projected gradient descent.
Vec penalised_projection(const FunctionSpec& g, double mu, const Vec& y, const Vec& start) {
  Vec x = start.cwiseMax(0.0);
  Vec grad;
  auto objective = [&](const Vec& z, Vec* gz) {
    double v;
    if (gz) {
      v = g.value_and_gradient(z, *gz);
      *gz = (z - y) + mu * *gz;
    } else {
      v = g.value(z);
    }
    return 0.5 * (z - y).squaredNorm() + mu * v;
  };
  double f = objective(x, &grad);
  double step = 1.0;
  for (int it = 0; it < 2000; ++it) {
    bool accepted = false;
    while (step > 1e-14) {
      const Vec xt = (x - step * grad).cwiseMax(0.0);
      const double ft = objective(xt, nullptr);
      if (ft <= f - 1e-4 * grad.dot(x - xt)) {
        const double moved = (xt - x).norm();
        x = xt;
        f = objective(x, &grad);
        accepted = true;
        if (moved < 1e-14 * (1.0 + x.norm())) return x;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    step = std::min(step * 2.0, 1e6);
  }
  return x;
}

Vec generic_projection(const FunctionSpec& g, double gamma, const Vec& y) {
  const Vec y_plus = y.cwiseMax(0.0);
  if (g.value(y_plus) <= gamma) return y_plus;
  if (g.value(Vec::Zero(y.size())) > gamma)
    throw InfeasibleRegion("optim.project_onto_budget", "budget set is empty");
  double lo = 0.0, hi = 1.0;
  Vec x_hi = penalised_projection(g, hi, y, y_plus);
  for (int i = 0; i < 60 && g.value(x_hi) > gamma; ++i) {
    lo = hi;
    hi *= 2.0;
    x_hi = penalised_projection(g, hi, y, x_hi);
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    const Vec x_mid = penalised_projection(g, mid, y, x_hi);
    if (g.value(x_mid) > gamma) {
      lo = mid;
    } else {
      hi = mid;
      x_hi = x_mid;
    }
    if (hi - lo <= 1e-13 * hi) break;
  }
  return x_hi;
}

double residual_at(const FunctionSpec& g, double gamma, const Vec& x, const Vec& grad) {
  return (x - project_onto_budget(g, gamma, x + grad)).norm();
}

// Exact maximisers for (u, linear g) pairs with closed forms.
std::optional<Vec> closed_form(const FunctionSpec& u, const FunctionSpec& g, double gamma) {
  const LinearFn* budget = as_linear(g);
  if (!budget || !positive(budget->coeffs)) return std::nullopt;
  const Vec& p = budget->coeffs;
  const double B = gamma - budget->offset;
  if (B < 0.0) throw InfeasibleRegion(kWhere, "budget set is empty (g(0) > gamma)");
  const Eigen::Index m = p.size();

  switch (u.kind()) {
    case FunctionKind::linear: {
      const Vec& a = std::get<LinearFn>(u.node().params).coeffs;
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < m; ++i)
        if (a[i] / p[i] > a[best] / p[best]) best = i;
      Vec x = Vec::Zero(m);
      if (a[best] > 0.0) x[best] = B / p[best];
      return x;
    }
    case FunctionKind::cobb_douglas:
    case FunctionKind::log_linear: {
      const Vec& w = u.kind() == FunctionKind::cobb_douglas
                         ? std::get<CobbDouglasFn>(u.node().params).exponents
                         : std::get<LogLinearFn>(u.node().params).weights;
      if (u.kind() == FunctionKind::cobb_douglas &&
          !(std::get<CobbDouglasFn>(u.node().params).scale > 0.0))
        return std::nullopt;
      if ((w.array() < 0.0).any() || !(w.sum() > 0.0)) return std::nullopt;
      const double total = w.sum();
      Vec x(m);
      for (Eigen::Index i = 0; i < m; ++i) x[i] = (w[i] / total) * B / p[i];
      return x;
    }
    case FunctionKind::quadratic: {
      // Separable concave quadratic: x_i(mu) = max(0, (b_i - mu p_i) / (-2 A_ii)).
      const auto& q = std::get<QuadraticFn>(u.node().params);
      const Mat off = q.A - Mat(q.A.diagonal().asDiagonal());
      if (!off.isZero(0.0) || !(q.A.diagonal().array() < 0.0).all()) return std::nullopt;
      const Vec curv = -2.0 * q.A.diagonal();
      auto at = [&](double mu) {
        Vec x(m);
        for (Eigen::Index i = 0; i < m; ++i) x[i] = std::max(0.0, (q.b[i] - mu * p[i]) / curv[i]);
        return x;
      };
      Vec x = at(0.0);
      if (p.dot(x) <= B) return x;
      // Budget spend is piecewise linear and decreasing in mu.
      std::vector<Eigen::Index> order;
      for (Eigen::Index i = 0; i < m; ++i)
        if (q.b[i] > 0.0) order.push_back(i);
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return q.b[a] / p[a] > q.b[b] / p[b];
      });
      double s0 = 0.0, s1 = 0.0, mu = 0.0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        const Eigen::Index i = order[k];
        s0 += p[i] * q.b[i] / curv[i];
        s1 += p[i] * p[i] / curv[i];
        mu = (s0 - B) / s1;
        const double next = k + 1 < order.size() ? q.b[order[k + 1]] / p[order[k + 1]] : 0.0;
        if (mu >= next) break;
      }
      return at(mu);
    }
    default:
      return std::nullopt;
  }
}

Vec random_start(const FunctionSpec& g, double gamma, Rng& rng, Eigen::Index m) {
  const Vec d = rng.dirichlet(m);
  const double scale = rng.uniform(0.3, 1.0);
  if (const LinearFn* lin = as_linear(g); lin && positive(lin->coeffs)) {
    const double B = gamma - lin->offset;
    Vec x(m);
    for (Eigen::Index i = 0; i < m; ++i) x[i] = scale * B * d[i] / lin->coeffs[i];
    return x;
  }
  double lo = 0.0, hi = 1.0;
  while (g.value(hi * d) <= gamma) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw InfeasibleRegion(kWhere, "feasible region is unbounded along a ray");
  }
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g.value(mid * d) <= gamma ? lo : hi) = mid;
  }
  return scale * lo * d;
}

struct AscentOutcome {
  Vec x;
  double f;
  double residual;
  std::size_t iterations;
};

// Spectral projected gradient: Barzilai-Borwein steps with a nonmonotone
// Armijo test against the worst of the last few objective values.
AscentOutcome ascend(const FunctionSpec& u, const FunctionSpec& g, double gamma, Vec x,
                     const MaximizeOptions& opts) {
  constexpr std::size_t kMemory = 10;
  Vec grad;
  double f = u.value_and_gradient(x, grad);
  std::vector<double> recent{f};
  double step = 1.0;
  double residual = residual_at(g, gamma, x, grad);
  std::size_t it = 0;
  for (; it < opts.max_iters && residual > opts.kkt_tol; ++it) {
    const Vec d = project_onto_budget(g, gamma, x + step * grad) - x;
    const double slope = grad.dot(d);
    const double ref = *std::min_element(recent.begin(), recent.end());
    double t = 1.0;
    Vec xt;
    double ft = 0.0;
    bool accepted = false;
    while (t > 1e-16) {
      xt = x + t * d;
      ft = u.value(xt);
      if (std::isfinite(ft) && ft >= ref + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    Vec grad_t;
    ft = u.value_and_gradient(xt, grad_t);
    const Vec s = xt - x;
    const Vec y = grad - grad_t;
    const double sy = s.dot(y);
    // Negative curvature along s: grow the step instead of jumping to the cap.
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e10) : std::min(2.0 * step, 1e10);
    x = std::move(xt);
    grad = std::move(grad_t);
    f = ft;
    recent.push_back(f);
    if (recent.size() > kMemory) recent.erase(recent.begin());
    residual = residual_at(g, gamma, x, grad);
  }
  return {std::move(x), f, residual, it};
}

}  // namespace

Vec project_onto_budget(const FunctionSpec& g, double gamma, const Vec& y) {
  if (const LinearFn* lin = as_linear(g); lin && (lin->coeffs.array() >= 0.0).all()) {
    Vec p = lin->coeffs;
    // Zero-cost coordinates are unconstrained apart from x >= 0.
    if (positive(p)) return project_halfspace_orthant(p, gamma - lin->offset, y);
  }
  return generic_projection(g, gamma, y);
}

Vec feasible_box(const FunctionSpec& g, double gamma) {
  const Eigen::Index m = g.dimension();
  if (g.value(Vec::Zero(m)) > gamma)
    throw InfeasibleRegion("optim.feasible_box", "budget set is empty (g(0) > gamma)");
  Vec box(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (const LinearFn* lin = as_linear(g); lin && lin->coeffs[i] > 0.0) {
      box[i] = (gamma - lin->offset) / lin->coeffs[i];
      continue;
    }
    Vec e = Vec::Zero(m);
    double lo = 0.0, hi = 1.0;
    e[i] = hi;
    while (g.value(e) <= gamma) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12)
        throw InfeasibleRegion("optim.feasible_box", "feasible set is unbounded along axis " +
                                                          std::to_string(i));
      e[i] = hi;
    }
    for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      e[i] = mid;
      (g.value(e) <= gamma ? lo : hi) = mid;
    }
    box[i] = lo;
  }
  return box;
}

OptimumPoint maximize_concave(const FunctionSpec& u, const FunctionSpec& g, double gamma,
                              const MaximizeOptions& opts) {
  const Eigen::Index m = u.dimension();
  if (g.dimension() != m) throw SchemaError(kWhere, "utility and budget dimensions differ");
  if (!(g.value(Vec::Zero(m)) <= gamma))
    throw InfeasibleRegion(kWhere, "no feasible start: g(0) > gamma");

  OptimumPoint best;
  if (opts.use_closed_form) {
    if (auto x = closed_form(u, g, gamma)) {
      Vec grad;
      best.objective = u.value_and_gradient(*x, grad);
      best.kkt_residual = residual_at(g, gamma, *x, grad);
      best.point = std::move(*x);
      best.active = std::abs(g.value(best.point) - gamma) <= opts.activity_tol;
      return best;
    }
  }

  Rng rng(opts.seed);
  bool have = false;
  std::size_t index = 0;
  auto consider = [&](Vec start) {
    AscentOutcome r = ascend(u, g, gamma, project_onto_budget(g, gamma, start), opts);
    const bool better = !have || r.f > best.objective + 1e-12 * (1.0 + std::abs(best.objective));
    if (better && std::isfinite(r.f)) {
      best.point = std::move(r.x);
      best.objective = r.f;
      best.kkt_residual = r.residual;
      best.iterations = r.iterations;
      best.start_index = index;
      have = true;
    }
    ++index;
  };
  if (opts.warm_start) consider(*opts.warm_start);
  if (const LinearFn* lin = as_linear(g); opts.vertex_starts && lin && positive(lin->coeffs)) {
    for (Eigen::Index i = 0; i < m; ++i) {
      Vec v = Vec::Zero(m);
      v[i] = (gamma - lin->offset) / lin->coeffs[i];
      consider(std::move(v));
    }
  }
  for (std::size_t s = 0; s < opts.n_starts; ++s) consider(random_start(g, gamma, rng, m));
  if (!have) throw InfeasibleRegion(kWhere, "no start produced a finite objective");

  best.active = std::abs(g.value(best.point) - gamma) <= opts.activity_tol;
  if (best.kkt_residual > opts.kkt_tol)
    throw NonConverged(kWhere,
                       "KKT residual " + std::to_string(best.kkt_residual) + " above tolerance",
                       best.point, best.kkt_residual);
  return best;
}

OptimumPoint grid_oracle_maximize(const FunctionSpec& u, const FunctionSpec& g, double gamma,
                                  std::size_t grid_n) {
  const Eigen::Index m = u.dimension();
  if (m > 3) throw UnsupportedDimension("optim.grid_oracle_maximize", "grid oracle supports m <= 3");
  if (grid_n < 2) throw ConfigError("optim.grid_oracle_maximize", "grid_n must be at least 2");
  const Vec box = feasible_box(g, gamma);

  OptimumPoint best;
  best.objective = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  Vec x(m);
  const double denom = static_cast<double>(grid_n - 1);
  while (true) {
    for (Eigen::Index i = 0; i < m; ++i)
      x[i] = box[i] * static_cast<double>(idx[static_cast<std::size_t>(i)]) / denom;
    if (g.value(x) <= gamma) {
      const double v = u.value(x);
      if (v > best.objective) {
        best.objective = v;
        best.point = x;
      }
    }
    ++best.iterations;
    Eigen::Index d = 0;
    while (d < m && ++idx[static_cast<std::size_t>(d)] == grid_n) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == m) break;
  }
  if (best.point.size() == 0) throw InfeasibleRegion("optim.grid_oracle_maximize", "no feasible grid point");
  best.active = std::abs(g.value(best.point) - gamma) <= 1.0 / denom * std::max(1.0, std::abs(gamma));
  best.kkt_residual = std::numeric_limits<double>::quiet_NaN();
  return best;
}

}  // namespace iirl
