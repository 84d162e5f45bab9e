#include "iirl/search.hpp"

#include <cmath>

#include "iirl/errors.hpp"
#include "iirl/random.hpp"

namespace iirl {

namespace {

constexpr const char* kWhere = "optim.coordinate_search_minimize";

}  // namespace

CoordinateSearchResult coordinate_search_minimize(
    const std::function<double(const Vec&)>& objective,
    const std::function<double(const Vec&)>& constraint, const Vec& x0,
    const CoordinateSearchOptions& opts) {
  if (!(constraint(x0) <= 0.0))
    throw InfeasibleStart(kWhere, "x0 violates the constraint; supply a feasible initializer");

  const double step0 =
      opts.initial_step > 0.0 ? opts.initial_step : 0.1 * std::max(1.0, x0.cwiseAbs().maxCoeff());
  CoordinateSearchResult best{x0, objective(x0), 1};

  auto descend = [&](Vec x, double fx) {
    double step = step0;
    while (step >= opts.min_step && best.evaluations < opts.max_evals) {
      bool improved = false;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (double dir : {1.0, -1.0}) {
          Vec trial = x;
          trial[i] += dir * step;
          const double ft = objective(trial);
          ++best.evaluations;
          if (ft < fx && constraint(trial) <= 0.0) {
            x = std::move(trial);
            fx = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= opts.shrink;
    }
    if (fx < best.objective) {
      best.x = std::move(x);
      best.objective = fx;
    }
  };

  descend(x0, best.objective);
  Rng rng(opts.seed);
  const double radius = opts.restart_radius > 0.0 ? opts.restart_radius : step0;
  for (std::size_t s = 1; s < opts.n_starts; ++s) {
    Vec start = x0;
    for (Eigen::Index i = 0; i < start.size(); ++i) start[i] += rng.uniform(-radius, radius);
    if (!(constraint(start) <= 0.0)) continue;
    descend(start, objective(start));
  }
  return best;
}

}  // namespace iirl
