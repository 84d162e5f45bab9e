#include "iirl/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iirl/errors.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/search.hpp"
#include "iirl/serialize.hpp"

namespace iirl {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kScenarioSchema = "iirl-scenario";

std::vector<Vec> points_of(const std::vector<OptimumPoint>& v) {
  std::vector<Vec> out;
  for (const auto& o : v) out.push_back(o.point);
  return out;
}

OptimumPoint solve_response(const MaskingProblem& p, std::size_t t, double gamma,
                            const std::optional<Vec>& warm) {
  MaximizeOptions opts = p.options.inner;
  opts.warm_start = warm;
  try {
    return maximize_concave(p.utilities[t], p.budget, gamma, opts);
  } catch (const NonConverged& e) {
    if (e.residual() > p.options.accept_residual) throw;
    OptimumPoint o;
    o.point = e.best_iterate();
    o.objective = p.utilities[t].value(o.point);
    o.kkt_residual = e.residual();
    o.active = std::abs(p.budget.value(o.point) - gamma) <= opts.activity_tol;
    return o;
  }
}

double threshold_margin(const std::vector<Vec>& responses, const MaskingProblem& p,
                        const std::vector<double>& thresholds) {
  return *margin_strategy(responses, p.utilities, thresholds, p.budget).threshold_value;
}

// Memoised argmax responses per (t, threshold). Warm starts are always the
// naive response, so a cached entry equals a fresh solve.
class Masker {
 public:
  explicit Masker(const MaskingProblem& p) : p_(p), cache_(p.horizon()) {
    validate_problem(p);
    const std::size_t K = p.horizon();
    for (std::size_t t = 0; t < K; ++t) {
      try {
        naive_.responses.push_back(solve_response(p, t, p.thresholds[t], std::nullopt));
      } catch (const Error& e) {
        throw Error("iirl.naive_responses", "t=" + std::to_string(t) + ": " + e.what());
      }
      const double g0 = std::max(0.0, p.budget.value(Vec::Zero(p.budget.dimension())));
      lower_.push_back(std::max(p.options.lower_fraction * p.thresholds[t], g0 + 1e-12));
      upper_.push_back(p.options.upper_factor * p.thresholds[t]);
    }
    naive_.margin = margin_strategy(points_of(naive_.responses), p.utilities, p.thresholds, p.budget);
    naive_.psi_true = *naive_.margin.threshold_value;
  }

  const NaiveSolution& naive() const { return naive_; }

  MaskingResult solve(double eta) {
    constexpr const char* kWhere = "iirl.mask_strategy";
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError(kWhere, "eta must lie in [0, 1]");
    MaskingResult r;
    r.naive_responses = points_of(naive_.responses);
    r.psi_true = naive_.psi_true;
    r.thresholds = p_.thresholds;
    r.target = (1.0 - eta) * naive_.psi_true;
    r.masked_thresholds = p_.thresholds;
    r.masked_responses = r.naive_responses;
    r.psi_masked = naive_.psi_true;

    if (eta == 0.0 || naive_.psi_true <= 0.0) {
      if (naive_.psi_true <= 0.0 && eta > 0.0)
        r.warnings.push_back("degenerate naive margin " + std::to_string(naive_.psi_true) +
                             " <= 0: thresholds left unchanged");
      r.feasible = true;
      return r;
    }

    const double c = r.target;
    best_reached_ = kInf;
    struct Best {
      double objective = kInf;
      std::size_t j = 0, k = 0;
      double a = 0.0, b = 0.0;
    } best;
    // Margin is a minimum over pair terms, so any archived point whose term
    // already meets this target is feasible here too.
    for (const auto& h : archive_)
      if (h.term <= c) {
        const double obj = std::pow(h.a - p_.thresholds[h.j], 2) + std::pow(h.b - p_.thresholds[h.k], 2);
        if (obj < best.objective) best = {obj, h.j, h.k, h.a, h.b};
      }
    auto pairs = candidates(c);
    for (const auto& kp : known_)
      if (std::find(pairs.begin(), pairs.end(), kp) == pairs.end()) pairs.push_back(kp);
    for (const auto& [j, k] : pairs) {
      const auto sol = solve_pair(j, k, c);
      if (!sol) continue;
      archive_.push_back({j, k, sol->a, sol->b, eps(j, k, sol->a, sol->b)});
      if (sol->objective < best.objective) best = {sol->objective, j, k, sol->a, sol->b};
    }
    if (!std::isfinite(best.objective))
      throw MaskingInfeasible(kWhere, "no threshold pair in the search box reaches the target " +
                                          std::to_string(c) + "; best margin reached " +
                                          std::to_string(best_reached_));

    r.masked_thresholds[best.j] = best.a;
    r.masked_thresholds[best.k] = best.b;
    r.masked_responses[best.j] = at(best.j, best.a).x;
    r.masked_responses[best.k] = at(best.k, best.b).x;
    r.pair = std::make_pair(best.j, best.k);
    if (std::find(known_.begin(), known_.end(), *r.pair) == known_.end()) known_.push_back(*r.pair);
    r.objective = 0.0;
    for (std::size_t t = 0; t < p_.horizon(); ++t)
      r.objective += std::pow(r.masked_thresholds[t] - p_.thresholds[t], 2);
    r.violation_norm = std::sqrt(r.objective);
    r.psi_masked = threshold_margin(r.masked_responses, p_, r.masked_thresholds);
    r.feasible = r.psi_masked <= c + p_.options.check_slack;
    if (!r.feasible)
      r.warnings.push_back("recomputed margin " + std::to_string(r.psi_masked) + " misses target " +
                           std::to_string(c));
    return r;
  }

 private:
  struct Entry {
    bool ok = false;
    Vec x;
    double u_own = 0.0;
    double lambda = 0.0;
  };

  const Entry& at(std::size_t t, double gamma) {
    auto it = cache_[t].find(gamma);
    if (it != cache_[t].end()) return it->second;
    Entry e;
    try {
      const OptimumPoint o = gamma == p_.thresholds[t] && !naive_.responses.empty()
                                 ? naive_.responses[t]
                                 : solve_response(p_, t, gamma, naive_.responses[t].point);
      e.x = o.point;
      e.u_own = p_.utilities[t].value(e.x);
      e.lambda = kkt_multiplier_on_support(p_.budget.gradient(e.x), p_.utilities[t].gradient(e.x), e.x)
                     .lambda;
      e.ok = std::isfinite(e.lambda) && std::isfinite(e.u_own);
    } catch (const Error&) {
      e.ok = false;
    }
    return cache_[t].emplace(gamma, std::move(e)).first->second;
  }

  // eps_{j,k}(a, b) = a - b - lambda_k(b) (u_k(x_j(a)) - u_k(x_k(b))).
  double eps(std::size_t j, std::size_t k, double a, double b) {
    const Entry& ej = at(j, a);
    const Entry& ek = at(k, b);
    if (!ej.ok || !ek.ok) return kInf;
    const double v = a - b - ek.lambda * (p_.utilities[k].value(ej.x) - ek.u_own);
    if (std::isfinite(v)) best_reached_ = std::min(best_reached_, v);
    return std::isfinite(v) ? v : kInf;
  }

  double step_for(std::size_t t) const { return 1e-5 * std::max(1.0, p_.thresholds[t]); }

  // Pairs ranked by the squared distance to the linearised constraint
  // eps_{j,k} = c at the true thresholds.
  std::vector<std::pair<std::size_t, std::size_t>> candidates(double c) {
    const std::size_t K = p_.horizon();
    struct Ranked {
      double estimate;
      std::size_t j, k;
    };
    std::vector<Ranked> ranked;
    for (std::size_t j = 0; j < K; ++j) {
      for (std::size_t k = 0; k < K; ++k) {
        if (j == k) continue;
        const double a = p_.thresholds[j], b = p_.thresholds[k];
        const double e0 = eps(j, k, a, b);
        const double da = (eps(j, k, a + step_for(j), b) - e0) / step_for(j);
        const double db = (eps(j, k, a, b + step_for(k)) - e0) / step_for(k);
        const double norm2 = da * da + db * db;
        double estimate = kInf;
        if (std::isfinite(e0) && std::isfinite(norm2) && norm2 > 0.0)
          estimate = std::pow(std::max(0.0, e0 - c), 2) / norm2;
        ranked.push_back({estimate, j, k});
      }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const Ranked& x, const Ranked& y) { return x.estimate < y.estimate; });
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t n = std::min(ranked.size(), std::max<std::size_t>(1, p_.options.candidate_pairs));
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(ranked[i].j, ranked[i].k);
    return out;
  }

  struct PairSolution {
    double objective;
    double a, b;
  };

  std::optional<PairSolution> solve_pair(std::size_t j, std::size_t k, double c) {
    const double ca = p_.thresholds[j], cb = p_.thresholds[k];
    auto F = [&](double a, double b) { return eps(j, k, a, b) - c; };
    auto clip = [&](double& a, double& b) {
      a = std::clamp(a, lower_[j], upper_[j]);
      b = std::clamp(b, lower_[k], upper_[k]);
    };

    // Gauss-Newton projection of the centre onto {F = 0}.
    double a = ca, b = cb;
    for (int it = 0; it < 40; ++it) {
      const double f = F(a, b);
      if (!std::isfinite(f)) break;
      const double ha = step_for(j), hb = step_for(k);
      const double ga = (F(a + ha, b) - F(a - ha, b)) / (2.0 * ha);
      const double gb = (F(a, b + hb) - F(a, b - hb)) / (2.0 * hb);
      const double n2 = ga * ga + gb * gb;
      if (!std::isfinite(n2) || n2 == 0.0) break;
      const double shift = (ga * (a - ca) + gb * (b - cb) - f) / n2;
      double na = ca + ga * shift, nb = cb + gb * shift;
      clip(na, nb);
      const double moved = std::hypot(na - a, nb - b);
      a = na;
      b = nb;
      if (moved <= 1e-13 * std::max(1.0, std::hypot(a, b))) break;
    }

    double theta = std::atan2(b - cb, a - ca);
    double radius = std::hypot(a - ca, b - cb);
    if (radius == 0.0) return std::nullopt;
    radius = boundary_radius(j, k, c, theta, radius);
    if (!std::isfinite(radius)) {
      // Fall back to the ray towards the origin (homogeneous utilities keep
      // the term small along proportional scaling), then a coarse scan.
      for (int s = -1; s < 16; ++s) {
        const double th = s < 0 ? std::atan2(-cb, -ca) : 2.0 * M_PI * s / 16.0;
        const double r = boundary_radius(j, k, c, th, 0.1 * std::max(1.0, std::hypot(ca, cb)));
        if (r < radius) {
          radius = r;
          theta = th;
        }
      }
      if (!std::isfinite(radius)) return std::nullopt;
    }

    if (p_.options.polish_evals > 0) {
      double r_guess = radius;
      auto objective = [&](const Vec& th) {
        const double r = boundary_radius(j, k, c, th[0], r_guess);
        if (r < r_guess) r_guess = r;
        return r * r;
      };
      CoordinateSearchOptions cs;
      cs.initial_step = 0.02;
      cs.min_step = 1e-7;
      cs.max_evals = p_.options.polish_evals;
      const auto res = coordinate_search_minimize(
          objective, [](const Vec&) { return -1.0; }, Vec::Constant(1, theta), cs);
      if (res.objective < radius * radius) {
        theta = res.x[0];
        radius = std::sqrt(res.objective);
      }
    }
    a = ca + radius * std::cos(theta);
    b = cb + radius * std::sin(theta);
    if (!(F(a, b) <= 0.0)) return std::nullopt;
    return PairSolution{std::pow(a - ca, 2) + std::pow(b - cb, 2), a, b};
  }

  // Smallest radius along direction theta from the true thresholds at which
  // the pair term reaches the target, bracketed around `guess`. Infinity when
  // the ray leaves the search box first.
  double boundary_radius(std::size_t j, std::size_t k, double c, double theta, double guess) {
    const double ca = p_.thresholds[j], cb = p_.thresholds[k];
    const double ua = std::cos(theta), ub = std::sin(theta);
    double r_max = kInf;
    if (ua > 0) r_max = std::min(r_max, (upper_[j] - ca) / ua);
    if (ua < 0) r_max = std::min(r_max, (lower_[j] - ca) / ua);
    if (ub > 0) r_max = std::min(r_max, (upper_[k] - cb) / ub);
    if (ub < 0) r_max = std::min(r_max, (lower_[k] - cb) / ub);
    auto F = [&](double r) { return eps(j, k, ca + r * ua, cb + r * ub) - c; };

    double lo = 0.0, hi = std::min(guess, r_max);
    if (!(hi > 0.0)) return kInf;
    if (F(hi) <= 0.0) {
      const double below = hi * (1.0 - 1e-6);
      if (F(below) > 0.0) lo = below;
    } else {
      // The feasible stretch of the ray may lie below the guess.
      for (double s : {0.8, 0.6, 0.4, 0.2}) {
        if (F(s * hi) <= 0.0) {
          hi *= s;
          break;
        }
      }
    }
    if (F(hi) > 0.0) {
      lo = hi;
      double grow = 1e-6;
      for (;;) {
        if (lo >= r_max) return kInf;
        hi = std::min(r_max, lo * (1.0 + grow));
        if (F(hi) <= 0.0) break;
        lo = hi;
        grow = std::min(grow * 8.0, 1.0);
      }
    }
    while (hi - lo > 1e-13 * std::max(1.0, hi)) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (F(mid) <= 0.0 ? hi : lo) = mid;
    }
    return hi;
  }

  const MaskingProblem& p_;
  NaiveSolution naive_;
  std::vector<std::map<double, Entry>> cache_;
  std::vector<double> lower_, upper_;
  double best_reached_ = kInf;
  struct Archived {
    std::size_t j, k;
    double a, b;
    double term;
  };
  std::vector<Archived> archive_;
  // Pairs that carried an earlier solve; retried for every later target.
  std::vector<std::pair<std::size_t, std::size_t>> known_;
};

MaskingOptions options_from_json(const json& j, MaskingOptions o) {
  if (!j.is_object()) throw SchemaError("iirl.scenario", "field 'solver' must be an object");
  o.inner.kkt_tol = j.value("kkt_tol", o.inner.kkt_tol);
  o.inner.max_iters = j.value("max_iters", o.inner.max_iters);
  o.inner.n_starts = j.value("n_starts", o.inner.n_starts);
  o.inner.seed = j.value("seed", o.inner.seed);
  o.accept_residual = j.value("accept_residual", o.accept_residual);
  o.candidate_pairs = j.value("candidate_pairs", o.candidate_pairs);
  o.lower_fraction = j.value("lower_fraction", o.lower_fraction);
  o.upper_factor = j.value("upper_factor", o.upper_factor);
  o.polish_evals = j.value("polish_evals", o.polish_evals);
  o.check_slack = j.value("check_slack", o.check_slack);
  return o;
}

}  // namespace

void validate_problem(const MaskingProblem& p) {
  constexpr const char* kWhere = "iirl.MaskingProblem";
  const std::size_t K = p.horizon();
  if (K < 2) throw ConfigError(kWhere, "K >= 2 required for a defined margin");
  if (p.thresholds.size() != K) throw SchemaError(kWhere, "one threshold per utility required");
  if (!p.budget.valid()) throw SchemaError(kWhere, "missing budget function");
  if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw ConfigError(kWhere, "eta must lie in [0, 1]");
  for (std::size_t t = 0; t < K; ++t) {
    if (!p.utilities[t].valid() || p.utilities[t].dimension() != p.budget.dimension())
      throw SchemaError(kWhere, "utility " + std::to_string(t) + " missing or of wrong dimension");
    if (!(p.thresholds[t] > 0.0) || !std::isfinite(p.thresholds[t]))
      throw ConfigError(kWhere, "threshold " + std::to_string(t) + " must be positive");
  }
  if (!(p.options.upper_factor > 1.0) || !(p.options.lower_fraction > 0.0) ||
      !(p.options.lower_fraction < 1.0))
    throw ConfigError(kWhere, "search box must contain the true thresholds");
}

NaiveSolution naive_responses(const MaskingProblem& p) { return Masker(p).naive(); }

MaskingResult mask_strategy(const MaskingProblem& p) { return Masker(p).solve(p.eta); }

std::vector<CurvePoint> violation_curve(const MaskingProblem& p, const std::vector<double>& etas) {
  Masker masker(p);
  // Largest eta first: its solutions meet every smaller target, and the
  // archive hands them on.
  std::vector<std::size_t> order(etas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return etas[a] > etas[b]; });
  std::vector<CurvePoint> out(etas.size());
  for (std::size_t i : order) {
    CurvePoint& c = out[i];
    c.eta = etas[i];
    c.psi_true = masker.naive().psi_true;
    try {
      MaskingResult r = masker.solve(c.eta);
      c.ok = r.feasible;
      c.violation_norm = r.violation_norm;
      c.objective = r.objective;
      c.psi_masked = r.psi_masked;
      if (!r.feasible) c.error = "masked margin misses target";
      c.result = std::move(r);
    } catch (const Error& e) {
      c.error = e.what();
    }
  }
  return out;
}

MaskingCheck verify_masking(const MaskingResult& r, const MaskingProblem& p) {
  MaskingCheck c;
  try {
    c.psi_true = threshold_margin(r.naive_responses, p, r.thresholds);
    c.psi_masked = threshold_margin(r.masked_responses, p, r.masked_thresholds);
  } catch (const Error&) {
    return c;
  }
  c.target = (1.0 - p.eta) * c.psi_true;
  c.ok = c.psi_masked <= c.target + p.options.check_slack;
  return c;
}

double margin_at_thresholds(const MaskingProblem& p, const std::vector<double>& thresholds,
                            std::vector<Vec>* responses) {
  std::vector<Vec> xs;
  for (std::size_t t = 0; t < p.horizon(); ++t)
    xs.push_back(solve_response(p, t, thresholds[t], std::nullopt).point);
  const double v = threshold_margin(xs, p, thresholds);
  if (responses) *responses = std::move(xs);
  return v;
}

json scenario_to_json(const MaskingProblem& p) {
  json j;
  j["schema"] = kScenarioSchema;
  j["version"] = kSchemaVersion;
  j["eta"] = p.eta;
  j["budget"] = function_to_json(p.budget);
  j["thresholds"] = p.thresholds;
  json us = json::array();
  for (const auto& u : p.utilities) us.push_back(function_to_json(u));
  j["utilities"] = us;
  const MaskingOptions& o = p.options;
  j["solver"] = {{"kkt_tol", o.inner.kkt_tol},
                 {"max_iters", o.inner.max_iters},
                 {"n_starts", o.inner.n_starts},
                 {"seed", o.inner.seed},
                 {"accept_residual", o.accept_residual},
                 {"candidate_pairs", o.candidate_pairs},
                 {"lower_fraction", o.lower_fraction},
                 {"upper_factor", o.upper_factor},
                 {"polish_evals", o.polish_evals},
                 {"check_slack", o.check_slack}};
  return j;
}

MaskingProblem scenario_from_json(const json& j) {
  constexpr const char* kWhere = "iirl.scenario";
  if (!j.is_object()) throw SchemaError(kWhere, "scenario document must be a JSON object");
  if (j.value("schema", std::string()) != kScenarioSchema)
    throw SchemaError(kWhere, std::string("field 'schema' must be '") + kScenarioSchema + "'");
  if (j.value("version", 0) != kSchemaVersion) throw SchemaError(kWhere, "unsupported schema version");
  for (const char* key : {"budget", "thresholds", "utilities"})
    if (!j.contains(key)) throw SchemaError(kWhere, std::string("missing field '") + key + "'");
  MaskingProblem p;
  p.eta = j.value("eta", 0.0);
  p.budget = function_from_json(j.at("budget"), "budget");
  if (!j.at("thresholds").is_array()) throw SchemaError(kWhere, "field 'thresholds' must be an array");
  for (const auto& v : j.at("thresholds")) {
    if (!v.is_number()) throw SchemaError(kWhere, "field 'thresholds' must hold numbers");
    p.thresholds.push_back(v.get<double>());
  }
  if (!j.at("utilities").is_array()) throw SchemaError(kWhere, "field 'utilities' must be an array");
  for (std::size_t t = 0; t < j.at("utilities").size(); ++t)
    p.utilities.push_back(function_from_json(j.at("utilities")[t], "utilities[" + std::to_string(t) + "]"));
  if (j.contains("solver")) p.options = options_from_json(j.at("solver"), p.options);
  validate_problem(p);
  return p;
}

MaskingProblem load_scenario(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError("iirl.scenario", path + ": " + e.what());
  }
}

void save_scenario(const MaskingProblem& p, const std::string& path) {
  write_json_file(scenario_to_json(p), path);
}

}  // namespace iirl
