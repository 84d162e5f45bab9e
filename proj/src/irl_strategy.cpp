#include "iirl/irl_strategy.hpp"

#include <limits>
#include <string>

#include "iirl/errors.hpp"

namespace iirl {

namespace {

void require_strategy_mode(const Dataset& d, const char* where) {
  if (d.mode != DatasetMode::strategy_test)
    throw ValidationError(where, "dataset must be in strategy-test mode");
  require_valid(d, kActivityTolerance, where);
}

}  // namespace

Mat transformed_costs(const Dataset& d) {
  const auto K = static_cast<Eigen::Index>(d.horizon());
  Mat cost(K, K);
  for (Eigen::Index t = 0; t < K; ++t) {
    const auto& u = d.function(static_cast<std::size_t>(t));
    const double own = u.value(d.response(static_cast<std::size_t>(t)));
    for (Eigen::Index s = 0; s < K; ++s)
      cost(t, s) = t == s ? 0.0 : own - u.value(d.response(static_cast<std::size_t>(s)));
  }
  return cost;
}

LinearFeasibilityProblem strategy_system(const Dataset& d) {
  const Mat cost = transformed_costs(d);
  const Eigen::Index K = cost.rows();
  LinearFeasibilityProblem p;
  p.n_vars = 2 * K;
  p.floors = Vec::Constant(2 * K, kWitnessFloor);
  for (Eigen::Index t = 0; t < K; ++t) {
    for (Eigen::Index s = 0; s < K; ++s) {
      if (s == t) continue;
      LinearRow row;
      row.coeffs = Vec::Zero(2 * K);
      row.coeffs[t] += 1.0;
      row.coeffs[s] -= 1.0;
      row.coeffs[K + t] = -cost(t, s);
      row.rhs = 0.0;
      row.sense = RowSense::less_equal;
      p.rows.push_back(std::move(row));
    }
  }
  return p;
}

StrategyResult strategy_feasibility_test(const Dataset& d, const FeasibilityOptions& opts) {
  require_strategy_mode(d, "irl_strategy.strategy_feasibility_test");
  const auto K = static_cast<Eigen::Index>(d.horizon());
  StrategyResult out;
  out.lp = solve_feasibility(strategy_system(d), opts);
  if (!out.lp.feasible) return out;

  BudgetReconstruction rec;
  rec.thresholds = out.lp.witness.head(K);
  rec.multipliers = out.lp.witness.tail(K);
  std::vector<EnvelopePiece> pieces;
  for (Eigen::Index t = 0; t < K; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    pieces.push_back({rec.thresholds[t], rec.multipliers[t], d.function(ts), d.response(ts),
                      d.function(ts).value(d.response(ts))});
  }
  rec.envelope = FunctionSpec::envelope(EnvelopeMode::max, std::move(pieces));
  out.reconstruction = std::move(rec);
  return out;
}

GarpResult garp_transformed(const Dataset& d, double tol) {
  require_strategy_mode(d, "irl_strategy.garp_transformed");
  return garp_from_costs(transformed_costs(d), tol);
}

Vec budget_multipliers(const std::vector<Vec>& responses,
                       const std::vector<FunctionSpec>& utilities, const FunctionSpec& g_true) {
  Vec lambda(static_cast<Eigen::Index>(responses.size()));
  for (std::size_t t = 0; t < responses.size(); ++t) {
    const Vec& x = responses[t];
    try {
      lambda[static_cast<Eigen::Index>(t)] =
          kkt_multiplier_on_support(g_true.gradient(x), utilities[t].gradient(x), x).lambda;
    } catch (const DegenerateGradient& e) {
      throw DegenerateGradient("irl_strategy.budget_multipliers",
                               "degenerate gradient at t=" + std::to_string(t) + ": " + e.what());
    }
  }
  return lambda;
}

FunctionSpec best_budget_estimate(const Dataset& d, const FunctionSpec& g_true,
                                  const std::vector<double>& thresholds) {
  if (d.mode != DatasetMode::strategy_test)
    throw ValidationError("irl_strategy.best_budget_estimate", "dataset must be in strategy-test mode");
  if (thresholds.size() != d.horizon())
    throw SchemaError("irl_strategy.best_budget_estimate", "one threshold per observation required");
  std::vector<Vec> responses;
  std::vector<FunctionSpec> utilities;
  for (const auto& e : d.entries) {
    responses.push_back(e.response);
    utilities.push_back(e.function);
  }
  const Vec lambda = budget_multipliers(responses, utilities, g_true);
  std::vector<EnvelopePiece> pieces;
  for (std::size_t t = 0; t < d.horizon(); ++t)
    pieces.push_back({thresholds[t], lambda[static_cast<Eigen::Index>(t)], utilities[t], responses[t],
                      utilities[t].value(responses[t])});
  return FunctionSpec::envelope(EnvelopeMode::max, std::move(pieces));
}

MarginReport margin_strategy(const std::vector<Vec>& responses,
                             const std::vector<FunctionSpec>& utilities,
                             const std::vector<double>& thresholds, const FunctionSpec& g_true) {
  constexpr const char* kWhere = "irl_strategy.margin_strategy";
  if (utilities.size() != responses.size())
    throw SchemaError(kWhere, "one utility per response required");
  if (!thresholds.empty() && thresholds.size() != responses.size())
    throw SchemaError(kWhere, "one threshold per response required");
  if (responses.size() < 2) throw UndefinedMargin(kWhere, "K=1 has no off-diagonal pairs");

  const auto K = static_cast<Eigen::Index>(responses.size());
  MarginReport r;
  r.multipliers = budget_multipliers(responses, utilities, g_true);
  Vec g_at(K), u_own(K);
  for (Eigen::Index t = 0; t < K; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    g_at[t] = g_true.value(responses[ts]);
    u_own[t] = utilities[ts].value(responses[ts]);
  }
  // Utility-difference part shared by both forms.
  Mat slope = Mat::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < K; ++j)
    for (Eigen::Index k = 0; k < K; ++k)
      if (j != k)
        slope(j, k) = r.multipliers[k] *
                      (utilities[static_cast<std::size_t>(k)].value(responses[static_cast<std::size_t>(j)]) -
                       u_own[k]);

  r.pair_terms = Mat::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index j = 0; j < K; ++j)
    for (Eigen::Index k = 0; k < K; ++k)
      if (j != k) r.pair_terms(j, k) = g_at[j] - g_at[k] - slope(j, k);
  r.value = off_diagonal_extremum(r.pair_terms, false, &r.arg_j, &r.arg_k);

  if (!thresholds.empty()) {
    Mat terms = Mat::Constant(K, K, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index j = 0; j < K; ++j)
      for (Eigen::Index k = 0; k < K; ++k)
        if (j != k)
          terms(j, k) = thresholds[static_cast<std::size_t>(j)] - thresholds[static_cast<std::size_t>(k)] -
                        slope(j, k);
    r.threshold_value = off_diagonal_extremum(terms, false);
    r.threshold_terms = std::move(terms);
  }
  return r;
}

Dataset strategy_dataset(const std::vector<Vec>& responses,
                         const std::vector<FunctionSpec>& utilities) {
  Dataset d;
  d.mode = DatasetMode::strategy_test;
  for (std::size_t t = 0; t < responses.size(); ++t) d.entries.push_back({utilities[t], responses[t]});
  return d;
}

}  // namespace iirl
