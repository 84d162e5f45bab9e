#include "iirl/irl_utility.hpp"

#include <deque>
#include <limits>

#include "iirl/errors.hpp"

namespace iirl {

namespace {

// Shortest path from `from` to `to` in the direct relation, inclusive.
std::optional<std::vector<std::size_t>> shortest_path(const RelationMatrix& direct,
                                                      std::size_t from, std::size_t to) {
  const auto K = static_cast<std::size_t>(direct.rows());
  if (from == to) return std::vector<std::size_t>{from};
  std::vector<std::size_t> parent(K, K);
  std::vector<bool> seen(K, false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w = 0; w < K; ++w) {
      if (w == v || seen[w] || !direct(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)))
        continue;
      seen[w] = true;
      parent[w] = v;
      if (w == to) {
        std::vector<std::size_t> path{to};
        for (std::size_t c = to; c != from; c = parent[c]) path.push_back(parent[c]);
        return std::vector<std::size_t>(path.rbegin(), path.rend());
      }
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

}  // namespace

GarpResult garp_from_costs(const Mat& cost, double tol) {
  const Eigen::Index K = cost.rows();
  GarpResult r;
  r.direct = RelationMatrix::Constant(K, K, false);
  for (Eigen::Index t = 0; t < K; ++t)
    for (Eigen::Index s = 0; s < K; ++s) r.direct(t, s) = t == s || cost(t, s) <= tol;

  // Warshall's transitive closure, O(K^3).
  r.closure = r.direct;
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index i = 0; i < K; ++i)
      if (r.closure(i, k))
        for (Eigen::Index j = 0; j < K; ++j)
          if (r.closure(k, j)) r.closure(i, j) = true;

  for (Eigen::Index t = 0; t < K; ++t) {
    for (Eigen::Index s = 0; s < K; ++s) {
      if (t == s || !r.closure(t, s) || !(cost(s, t) < -tol)) continue;
      r.passes = false;
      auto path = shortest_path(r.direct, static_cast<std::size_t>(t), static_cast<std::size_t>(s));
      if (path && (!r.cycle || path->size() < r.cycle->size())) r.cycle = std::move(path);
    }
  }
  return r;
}

Mat constraint_costs(const Dataset& d) {
  const auto K = static_cast<Eigen::Index>(d.horizon());
  Mat cost(K, K);
  for (Eigen::Index t = 0; t < K; ++t)
    for (Eigen::Index s = 0; s < K; ++s)
      cost(t, s) = d.function(static_cast<std::size_t>(t)).value(d.response(static_cast<std::size_t>(s)));
  return cost;
}

GarpResult garp_check(const Dataset& d, double tol, double activity_tol) {
  if (d.mode != DatasetMode::utility_test)
    throw ValidationError("irl_utility.garp_check", "dataset must be in utility-test mode");
  require_valid(d, activity_tol, "irl_utility.garp_check");
  return garp_from_costs(constraint_costs(d), tol);
}

LinearFeasibilityProblem afriat_system(const Mat& cost) {
  const Eigen::Index K = cost.rows();
  LinearFeasibilityProblem p;
  p.n_vars = 2 * K;
  p.floors = Vec::Constant(2 * K, kWitnessFloor);
  for (Eigen::Index t = 0; t < K; ++t) {
    for (Eigen::Index s = 0; s < K; ++s) {
      if (s == t) continue;
      LinearRow row;
      row.coeffs = Vec::Zero(2 * K);
      row.coeffs[s] += 1.0;
      row.coeffs[t] -= 1.0;
      row.coeffs[K + t] = -cost(t, s);
      row.rhs = 0.0;
      row.sense = RowSense::less_equal;
      p.rows.push_back(std::move(row));
    }
  }
  return p;
}

AfriatResult afriat_test(const Dataset& d, const FeasibilityOptions& opts, double activity_tol) {
  if (d.mode != DatasetMode::utility_test)
    throw ValidationError("irl_utility.afriat_test", "dataset must be in utility-test mode");
  require_valid(d, activity_tol, "irl_utility.afriat_test");
  const Eigen::Index K = static_cast<Eigen::Index>(d.horizon());
  AfriatResult out;
  out.lp = solve_feasibility(afriat_system(constraint_costs(d)), opts);
  if (!out.lp.feasible) return out;

  UtilityReconstruction rec;
  rec.levels = out.lp.witness.head(K);
  rec.multipliers = out.lp.witness.tail(K);
  std::vector<EnvelopePiece> pieces;
  for (Eigen::Index t = 0; t < K; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    pieces.push_back({rec.levels[t], rec.multipliers[t], d.function(ts), d.response(ts), 0.0});
  }
  rec.envelope = FunctionSpec::envelope(EnvelopeMode::min, std::move(pieces));
  out.reconstruction = std::move(rec);
  return out;
}

Vec utility_multipliers(const Dataset& d, const FunctionSpec& u_true) {
  Vec lambda(static_cast<Eigen::Index>(d.horizon()));
  for (std::size_t t = 0; t < d.horizon(); ++t) {
    const Vec& x = d.response(t);
    try {
      lambda[static_cast<Eigen::Index>(t)] =
          kkt_multiplier_on_support(u_true.gradient(x), d.function(t).gradient(x), x).lambda;
    } catch (const DegenerateGradient& e) {
      throw DegenerateGradient("irl_utility.best_utility_estimate",
                               "degenerate gradient at t=" + std::to_string(t) + ": " + e.what());
    }
  }
  return lambda;
}

FunctionSpec best_utility_estimate(const Dataset& d, const FunctionSpec& u_true) {
  if (d.mode != DatasetMode::utility_test)
    throw ValidationError("irl_utility.best_utility_estimate", "dataset must be in utility-test mode");
  const Vec lambda = utility_multipliers(d, u_true);
  std::vector<EnvelopePiece> pieces;
  for (std::size_t t = 0; t < d.horizon(); ++t) {
    pieces.push_back({u_true.value(d.response(t)), lambda[static_cast<Eigen::Index>(t)],
                      d.function(t), d.response(t), 0.0});
  }
  return FunctionSpec::envelope(EnvelopeMode::min, std::move(pieces));
}

MarginReport margin_utility(const Dataset& d, const FunctionSpec& u_true) {
  if (d.horizon() < 2)
    throw UndefinedMargin("irl_utility.margin_utility", "K=1 has no off-diagonal pairs");
  const auto K = static_cast<Eigen::Index>(d.horizon());
  MarginReport r;
  r.multipliers = utility_multipliers(d, u_true);
  Vec u_at(K);
  for (Eigen::Index t = 0; t < K; ++t) u_at[t] = u_true.value(d.response(static_cast<std::size_t>(t)));
  r.pair_terms = Mat::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < K; ++j)
    for (Eigen::Index k = 0; k < K; ++k)
      if (j != k)
        r.pair_terms(j, k) =
            u_at[j] - u_at[k] -
            r.multipliers[k] *
                d.function(static_cast<std::size_t>(k)).value(d.response(static_cast<std::size_t>(j)));
  r.value = off_diagonal_extremum(r.pair_terms, true, &r.arg_j, &r.arg_k);
  return r;
}

double integrated_squared_error(const FunctionSpec& candidate, const FunctionSpec& u_true,
                                const Box& region, std::size_t grid_n) {
  const Eigen::Index m = u_true.dimension();
  if (m > 2)
    throw UnsupportedDimension("irl_utility.integrated_squared_error", "grid integration supports m <= 2");
  if (region.lower.size() != m || region.upper.size() != m)
    throw SchemaError("irl_utility.integrated_squared_error", "region dimension mismatch");
  if (grid_n < 1) throw ConfigError("irl_utility.integrated_squared_error", "grid_n must be positive");
  const Vec h = (region.upper - region.lower) / static_cast<double>(grid_n);
  const double cell = h.prod();
  double sum = 0.0;
  Vec x(m);
  const std::size_t outer = m == 2 ? grid_n : 1;
  for (std::size_t i = 0; i < grid_n; ++i) {
    x[0] = region.lower[0] + (static_cast<double>(i) + 0.5) * h[0];
    for (std::size_t j = 0; j < outer; ++j) {
      if (m == 2) x[1] = region.lower[1] + (static_cast<double>(j) + 0.5) * h[1];
      const double diff = u_true.value(x) - candidate.value(x);
      sum += diff * diff;
    }
  }
  return sum * cell;
}

}  // namespace iirl
