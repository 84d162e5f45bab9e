#include "iirl/dataset.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "iirl/errors.hpp"

namespace iirl {

const char* to_string(DatasetMode mode) {
  return mode == DatasetMode::utility_test ? "utility-test" : "strategy-test";
}

DatasetMode dataset_mode_from_string(const std::string& s) {
  if (s == "utility-test") return DatasetMode::utility_test;
  if (s == "strategy-test") return DatasetMode::strategy_test;
  throw SchemaError("core.Dataset", "unknown mode '" + s + "'");
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.mode != b.mode || a.entries.size() != b.entries.size()) return false;
  for (std::size_t t = 0; t < a.entries.size(); ++t) {
    const auto& x = a.entries[t];
    const auto& y = b.entries[t];
    if (x.response.size() != y.response.size() || !(x.response == y.response) ||
        !(x.function == y.function))
      return false;
  }
  return true;
}

std::vector<Violation> validate_dataset(const Dataset& d, double tol) {
  std::vector<Violation> out;
  if (d.entries.empty()) {
    out.push_back({std::nullopt, "K", 0.0, "horizon K must be at least 1"});
    return out;
  }
  const Eigen::Index m = d.dimension();
  if (m < 1) out.push_back({0, "response", 0.0, "response dimension must be at least 1"});

  for (std::size_t t = 0; t < d.entries.size(); ++t) {
    const auto& obs = d.entries[t];
    if (obs.response.size() != m) {
      out.push_back({t, "response", static_cast<double>(obs.response.size()),
                     "response dimension differs from m"});
      continue;
    }
    if (!obs.function.valid()) {
      out.push_back({t, "function", 0.0, "missing function"});
      continue;
    }
    if (obs.function.dimension() != m) {
      out.push_back({t, "function", static_cast<double>(obs.function.dimension()),
                     "function dimension differs from m"});
      continue;
    }
    if (!obs.response.allFinite()) {
      out.push_back({t, "response", std::numeric_limits<double>::quiet_NaN(),
                     "non-finite response coordinate"});
      continue;
    }
    const double lowest = obs.response.minCoeff();
    if (lowest < 0.0)
      out.push_back({t, "response", lowest, "negative response coordinate"});
    if (d.mode == DatasetMode::utility_test) {
      const double residual = obs.function.value(obs.response);
      if (!(std::abs(residual) <= tol))
        out.push_back({t, "activity", residual, "constraint not active at response"});
    }
  }
  return out;
}

void require_valid(const Dataset& d, double tol, const std::string& where) {
  const auto violations = validate_dataset(d, tol);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << violations.size() << " dataset violation(s); first: ";
  const auto& v = violations.front();
  if (v.index) msg << "t=" << *v.index << " ";
  msg << v.field << " (" << v.message << ", magnitude " << v.magnitude << ")";
  throw ValidationError(where, msg.str());
}

std::vector<Violation> validate_budget(const BudgetSpec& b) {
  std::vector<Violation> out;
  if (!b.base.valid()) {
    out.push_back({std::nullopt, "base", 0.0, "missing budget function"});
    return out;
  }
  const double at_origin = b.base.value(Vec::Zero(b.base.dimension()));
  for (std::size_t t = 0; t < b.thresholds.size(); ++t) {
    const double gamma = b.thresholds[t];
    if (!(gamma > 0.0)) out.push_back({t, "threshold", gamma, "threshold must be positive"});
    if (at_origin > gamma)
      out.push_back({t, "threshold", at_origin - gamma, "feasible set is empty (g(0) > gamma)"});
  }
  return out;
}

double off_diagonal_extremum(const Mat& terms, bool take_max, std::size_t* arg_j,
                             std::size_t* arg_k) {
  const Eigen::Index K = terms.rows();
  if (K < 2) throw UndefinedMargin("core.MarginReport", "margin needs K >= 2 (no off-diagonal pairs)");
  double best = take_max ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  std::size_t bj = 0, bk = 1;
  for (Eigen::Index j = 0; j < K; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) {
      if (j == k) continue;
      const double v = terms(j, k);
      if (take_max ? v > best : v < best) {
        best = v;
        bj = static_cast<std::size_t>(j);
        bk = static_cast<std::size_t>(k);
      }
    }
  }
  if (arg_j) *arg_j = bj;
  if (arg_k) *arg_k = bk;
  return best;
}

KktMultiplier kkt_multiplier(const Vec& grad_target, const Vec& grad_source) {
  if (grad_target.size() != grad_source.size())
    throw SchemaError("core.kkt_multiplier", "gradient dimensions differ");
  const double ss = grad_source.squaredNorm();
  if (!(ss > 0.0) || !std::isfinite(ss))
    throw DegenerateGradient("core.kkt_multiplier", "source gradient is zero or non-finite");
  KktMultiplier out;
  out.lambda = grad_source.dot(grad_target) / ss;
  out.non_monotone = !(out.lambda > 0.0);
  return out;
}

KktMultiplier kkt_multiplier_on_support(const Vec& grad_target, const Vec& grad_source,
                                        const Vec& point, double support_tol) {
  if (point.size() != grad_source.size())
    throw SchemaError("core.kkt_multiplier", "point dimension differs from gradients");
  const double cutoff = support_tol * std::max(1.0, point.cwiseAbs().maxCoeff());
  double st = 0.0, ss = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    if (point[i] > cutoff) {
      any = true;
      st += grad_source[i] * grad_target[i];
      ss += grad_source[i] * grad_source[i];
    }
  }
  if (!any) return kkt_multiplier(grad_target, grad_source);
  if (!(ss > 0.0) || !std::isfinite(ss))
    throw DegenerateGradient("core.kkt_multiplier",
                             "source gradient vanishes on the support of the response");
  KktMultiplier out;
  out.lambda = st / ss;
  out.non_monotone = !(out.lambda > 0.0);
  return out;
}

}  // namespace iirl
