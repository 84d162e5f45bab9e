#include "iirl/function.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "iirl/errors.hpp"

namespace iirl {

namespace {

constexpr const char* kWhere = "core.FunctionSpec";

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, CallbackFn>& registry() {
  static std::map<std::string, CallbackFn> r;
  return r;
}

bool all_nonnegative(const Vec& v) { return (v.array() >= 0.0).all(); }

bool same_vec(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool same_mat(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || a == b);
}

}  // namespace

const char* to_string(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::linear: return "linear";
    case FunctionKind::quadratic: return "quadratic";
    case FunctionKind::quadratic_fractional: return "quadratic-fractional";
    case FunctionKind::cobb_douglas: return "cobb-douglas";
    case FunctionKind::log_linear: return "log-linear";
    case FunctionKind::affine: return "affine";
    case FunctionKind::envelope: return "piecewise-envelope";
    case FunctionKind::callback: return "tabulated-callback-id";
  }
  return "unknown";
}

const char* to_string(EnvelopeMode mode) {
  return mode == EnvelopeMode::min ? "min" : "max";
}

FunctionSpec FunctionSpec::linear(Vec coeffs, double offset) {
  if (coeffs.size() < 1) throw SchemaError(kWhere, "linear: empty coefficients");
  auto node = std::make_shared<FunctionNode>();
  node->params = LinearFn{std::move(coeffs), offset};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::quadratic(Mat A, Vec b, double c) {
  if (A.rows() != A.cols() || A.rows() != b.size() || b.size() < 1)
    throw SchemaError(kWhere, "quadratic: A must be square and match b");
  auto node = std::make_shared<FunctionNode>();
  node->params = QuadraticFn{std::move(A), std::move(b), c};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::quadratic_fractional(Mat Q, Mat P, double zeta) {
  if (Q.rows() != Q.cols() || P.rows() != P.cols() || Q.rows() != P.rows() ||
      Q.rows() < 1)
    throw SchemaError(kWhere, "quadratic-fractional: Q and P must be square, same size");
  if (!(zeta > 0.0))
    throw SchemaError(kWhere, "quadratic-fractional: noise power must be positive");
  auto node = std::make_shared<FunctionNode>();
  node->params = QuadraticFractionalFn{std::move(Q), std::move(P), zeta};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::cobb_douglas(Vec exponents, double scale) {
  if (exponents.size() < 1) throw SchemaError(kWhere, "cobb-douglas: empty exponents");
  auto node = std::make_shared<FunctionNode>();
  node->params = CobbDouglasFn{std::move(exponents), scale};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::log_linear(Vec weights) {
  if (weights.size() < 1) throw SchemaError(kWhere, "log-linear: empty weights");
  auto node = std::make_shared<FunctionNode>();
  node->params = LogLinearFn{std::move(weights)};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::affine(FunctionSpec base, double scale, Vec linear,
                                  double offset) {
  if (!base.valid()) throw SchemaError(kWhere, "affine: missing base function");
  if (linear.size() == 0) linear = Vec::Zero(base.dimension());
  if (linear.size() != base.dimension())
    throw SchemaError(kWhere, "affine: linear term dimension mismatch");
  auto node = std::make_shared<FunctionNode>();
  node->params = AffineFn{std::move(base), scale, std::move(linear), offset};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::envelope(EnvelopeMode mode, std::vector<EnvelopePiece> pieces) {
  if (pieces.empty()) throw SchemaError(kWhere, "envelope: no pieces");
  const Eigen::Index m = pieces.front().base.dimension();
  for (const auto& p : pieces) {
    if (!p.base.valid() || p.base.dimension() != m)
      throw SchemaError(kWhere, "envelope: pieces must share one dimension");
    if (p.anchor.size() != 0 && p.anchor.size() != m)
      throw SchemaError(kWhere, "envelope: anchor dimension mismatch");
  }
  auto node = std::make_shared<FunctionNode>();
  node->params = EnvelopeFn{mode, std::move(pieces)};
  return FunctionSpec(std::move(node));
}

FunctionSpec FunctionSpec::callback(const std::string& id) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(id);
  if (it == registry().end())
    throw SchemaError(kWhere, "no callback registered under id '" + id + "'");
  auto node = std::make_shared<FunctionNode>();
  node->params = it->second;
  return FunctionSpec(std::move(node));
}

void FunctionSpec::register_callback(const std::string& id, Eigen::Index dimension,
                                     ValueFn value, GradientFn gradient,
                                     bool monotone) {
  if (dimension < 1 || !value || !gradient)
    throw SchemaError(kWhere, "callback '" + id + "': incomplete registration");
  std::lock_guard lock(registry_mutex());
  registry()[id] = CallbackFn{id, dimension, std::move(value), std::move(gradient),
                              monotone};
}

FunctionKind FunctionSpec::kind() const {
  return static_cast<FunctionKind>(node_->params.index());
}

Eigen::Index FunctionSpec::dimension() const {
  return std::visit(
      [](const auto& p) -> Eigen::Index {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearFn>) return p.coeffs.size();
        else if constexpr (std::is_same_v<T, QuadraticFn>) return p.b.size();
        else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) return p.Q.rows();
        else if constexpr (std::is_same_v<T, CobbDouglasFn>) return p.exponents.size();
        else if constexpr (std::is_same_v<T, LogLinearFn>) return p.weights.size();
        else if constexpr (std::is_same_v<T, AffineFn>) return p.base.dimension();
        else if constexpr (std::is_same_v<T, EnvelopeFn>)
          return p.pieces.front().base.dimension();
        else return p.dimension;
      },
      node_->params);
}

bool FunctionSpec::monotone() const {
  return std::visit(
      [](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearFn>) {
          return all_nonnegative(p.coeffs);
        } else if constexpr (std::is_same_v<T, QuadraticFn>) {
          return p.A.isZero(0.0) && all_nonnegative(p.b);
        } else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) {
          return false;  // depends on the matrices; checked numerically
        } else if constexpr (std::is_same_v<T, CobbDouglasFn>) {
          return p.scale >= 0.0 && all_nonnegative(p.exponents);
        } else if constexpr (std::is_same_v<T, LogLinearFn>) {
          return all_nonnegative(p.weights);
        } else if constexpr (std::is_same_v<T, AffineFn>) {
          return all_nonnegative(p.linear) &&
                 (p.scale == 0.0 || (p.scale > 0.0 && p.base.monotone()));
        } else if constexpr (std::is_same_v<T, EnvelopeFn>) {
          for (const auto& piece : p.pieces)
            if (piece.multiplier < 0.0 || !piece.base.monotone()) return false;
          return true;
        } else {
          return p.monotone;
        }
      },
      node_->params);
}

std::size_t active_piece(const EnvelopeFn& env, const Vec& x) {
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < env.pieces.size(); ++i) {
    const auto& piece = env.pieces[i];
    const double v = piece.level + piece.multiplier * (piece.base.value(x) - piece.reference);
    const bool better = env.mode == EnvelopeMode::min ? v < best_value : v > best_value;
    if (i == 0 || better) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

void FunctionSpec::check_argument(const Vec& x) const {
  if (x.size() != dimension())
    throw SchemaError(kWhere, "argument has dimension " + std::to_string(x.size()) + ", expected " +
                                  std::to_string(dimension()));
}

double FunctionSpec::value(const Vec& x) const {
  check_argument(x);
  return std::visit(
      [&x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearFn>) {
          return p.coeffs.dot(x) + p.offset;
        } else if constexpr (std::is_same_v<T, QuadraticFn>) {
          return x.dot(p.A * x) + p.b.dot(x) + p.c;
        } else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) {
          return x.dot(p.Q * x) / (x.dot(p.P * x) + p.zeta);
        } else if constexpr (std::is_same_v<T, CobbDouglasFn>) {
          double v = p.scale;
          for (Eigen::Index i = 0; i < x.size(); ++i) v *= std::pow(x[i], p.exponents[i]);
          return v;
        } else if constexpr (std::is_same_v<T, LogLinearFn>) {
          double v = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) v += p.weights[i] * std::log(x[i]);
          return v;
        } else if constexpr (std::is_same_v<T, AffineFn>) {
          return p.scale * p.base.value(x) + p.linear.dot(x) + p.offset;
        } else if constexpr (std::is_same_v<T, EnvelopeFn>) {
          const auto& piece = p.pieces[active_piece(p, x)];
          return piece.level + piece.multiplier * (piece.base.value(x) - piece.reference);
        } else {
          return p.value(x);
        }
      },
      node_->params);
}

Vec FunctionSpec::gradient(const Vec& x) const {
  Vec g;
  value_and_gradient(x, g);
  return g;
}

double FunctionSpec::value_and_gradient(const Vec& x, Vec& grad) const {
  check_argument(x);
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearFn>) {
          grad = p.coeffs;
          return p.coeffs.dot(x) + p.offset;
        } else if constexpr (std::is_same_v<T, QuadraticFn>) {
          const Vec Ax = p.A * x;
          grad = Ax + p.A.transpose() * x + p.b;
          return x.dot(Ax) + p.b.dot(x) + p.c;
        } else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) {
          const Vec Qx = p.Q * x;
          const Vec Px = p.P * x;
          const double num = x.dot(Qx);
          const double den = x.dot(Px) + p.zeta;
          const Vec dnum = Qx + p.Q.transpose() * x;
          const Vec dden = Px + p.P.transpose() * x;
          grad = (dnum * den - dden * num) / (den * den);
          return num / den;
        } else if constexpr (std::is_same_v<T, CobbDouglasFn>) {
          const Eigen::Index m = x.size();
          grad.resize(m);
          double v = p.scale;
          for (Eigen::Index i = 0; i < m; ++i) v *= std::pow(x[i], p.exponents[i]);
          for (Eigen::Index i = 0; i < m; ++i) {
            if (p.exponents[i] == 0.0) {
              grad[i] = 0.0;
              continue;
            }
            double gi = p.scale * p.exponents[i] * std::pow(x[i], p.exponents[i] - 1.0);
            for (Eigen::Index l = 0; l < m; ++l)
              if (l != i) gi *= std::pow(x[l], p.exponents[l]);
            grad[i] = gi;
          }
          return v;
        } else if constexpr (std::is_same_v<T, LogLinearFn>) {
          grad = p.weights.array() / x.array();
          double v = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i) v += p.weights[i] * std::log(x[i]);
          return v;
        } else if constexpr (std::is_same_v<T, AffineFn>) {
          Vec base_grad;
          const double v = p.base.value_and_gradient(x, base_grad);
          grad = p.scale * base_grad + p.linear;
          return p.scale * v + p.linear.dot(x) + p.offset;
        } else if constexpr (std::is_same_v<T, EnvelopeFn>) {
          // Gradient of the active piece; a subgradient on the kinks.
          const auto& piece = p.pieces[active_piece(p, x)];
          Vec base_grad;
          const double v = piece.base.value_and_gradient(x, base_grad);
          grad = piece.multiplier * base_grad;
          return piece.level + piece.multiplier * (v - piece.reference);
        } else {
          grad = p.gradient(x);
          return p.value(x);
        }
      },
      node_->params);
}

bool operator==(const FunctionSpec& a, const FunctionSpec& b) {
  if (a.node_ == b.node_) return true;
  if (!a.valid() || !b.valid()) return false;
  if (a.kind() != b.kind()) return false;
  return std::visit(
      [&b](const auto& pa) -> bool {
        using T = std::decay_t<decltype(pa)>;
        const auto& pb = std::get<T>(b.node().params);
        if constexpr (std::is_same_v<T, LinearFn>) {
          return same_vec(pa.coeffs, pb.coeffs) && pa.offset == pb.offset;
        } else if constexpr (std::is_same_v<T, QuadraticFn>) {
          return same_mat(pa.A, pb.A) && same_vec(pa.b, pb.b) && pa.c == pb.c;
        } else if constexpr (std::is_same_v<T, QuadraticFractionalFn>) {
          return same_mat(pa.Q, pb.Q) && same_mat(pa.P, pb.P) && pa.zeta == pb.zeta;
        } else if constexpr (std::is_same_v<T, CobbDouglasFn>) {
          return same_vec(pa.exponents, pb.exponents) && pa.scale == pb.scale;
        } else if constexpr (std::is_same_v<T, LogLinearFn>) {
          return same_vec(pa.weights, pb.weights);
        } else if constexpr (std::is_same_v<T, AffineFn>) {
          return pa.base == pb.base && pa.scale == pb.scale &&
                 same_vec(pa.linear, pb.linear) && pa.offset == pb.offset;
        } else if constexpr (std::is_same_v<T, EnvelopeFn>) {
          if (pa.mode != pb.mode || pa.pieces.size() != pb.pieces.size()) return false;
          for (std::size_t i = 0; i < pa.pieces.size(); ++i) {
            const auto& x = pa.pieces[i];
            const auto& y = pb.pieces[i];
            if (x.level != y.level || x.multiplier != y.multiplier ||
                x.reference != y.reference || !same_vec(x.anchor, y.anchor) ||
                !(x.base == y.base))
              return false;
          }
          return true;
        } else {
          return pa.id == pb.id;
        }
      },
      a.node_->params);
}

Vec finite_difference_gradient(const FunctionSpec& f, const Vec& x, double step) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f.value(xp);
    xp[i] = x[i] - h;
    const double fm = f.value(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace iirl
