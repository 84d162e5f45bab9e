#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace iirl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class FunctionKind {
  linear,
  quadratic,
  quadratic_fractional,
  cobb_douglas,
  log_linear,
  affine,
  envelope,
  callback,
};

enum class EnvelopeMode { min, max };

const char* to_string(FunctionKind kind);
const char* to_string(EnvelopeMode mode);

struct FunctionNode;
struct EnvelopePiece;

/// Immutable scalar field on R^m_+ with an analytic gradient.
///
/// A FunctionSpec is a cheap-to-copy handle onto a shared, immutable node, so
/// envelopes can hold their pieces by value. All evaluation is const and
/// thread-safe.
class FunctionSpec {
 public:
  FunctionSpec() = default;

  /// a'x + c
  static FunctionSpec linear(Vec coeffs, double offset = 0.0);
  /// x'Ax + b'x + c
  static FunctionSpec quadratic(Mat A, Vec b, double c = 0.0);
  /// x'Qx / (x'Px + zeta); the radar SINR.
  static FunctionSpec quadratic_fractional(Mat Q, Mat P, double zeta);
  /// scale * prod_i x_i^{a_i}
  static FunctionSpec cobb_douglas(Vec exponents, double scale = 1.0);
  /// sum_i w_i log x_i
  static FunctionSpec log_linear(Vec weights);
  /// scale * base(x) + d'x + offset
  static FunctionSpec affine(FunctionSpec base, double scale, Vec linear,
                             double offset);

  static FunctionSpec envelope(EnvelopeMode mode, std::vector<EnvelopePiece> pieces);

  /// Looks up a function previously registered under `id`.
  static FunctionSpec callback(const std::string& id);

  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  static void register_callback(const std::string& id, Eigen::Index dimension,
                                ValueFn value, GradientFn gradient,
                                bool monotone);

  bool valid() const noexcept { return node_ != nullptr; }
  FunctionKind kind() const;
  Eigen::Index dimension() const;

  /// True when the kind's parameters guarantee x' >= x => f(x') >= f(x).
  /// False means "not guaranteed", not "known decreasing".
  bool monotone() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double value_and_gradient(const Vec& x, Vec& grad) const;

  const FunctionNode& node() const { return *node_; }

  friend bool operator==(const FunctionSpec& a, const FunctionSpec& b);

 private:
  /// Throws SchemaError when x has the wrong dimension.
  void check_argument(const Vec& x) const;

  explicit FunctionSpec(std::shared_ptr<const FunctionNode> node)
      : node_(std::move(node)) {}

  std::shared_ptr<const FunctionNode> node_;
};

/// Piece value is level + multiplier * (base(x) - reference).
struct EnvelopePiece {
  double level = 0.0;
  double multiplier = 1.0;
  FunctionSpec base;
  Vec anchor;
  double reference = 0.0;
};

struct LinearFn {
  Vec coeffs;
  double offset = 0.0;
};

struct QuadraticFn {
  Mat A;
  Vec b;
  double c = 0.0;
};

struct QuadraticFractionalFn {
  Mat Q;
  Mat P;
  double zeta = 1.0;
};

struct CobbDouglasFn {
  Vec exponents;
  double scale = 1.0;
};

struct LogLinearFn {
  Vec weights;
};

struct AffineFn {
  FunctionSpec base;
  double scale = 1.0;
  Vec linear;
  double offset = 0.0;
};

struct EnvelopeFn {
  EnvelopeMode mode = EnvelopeMode::min;
  std::vector<EnvelopePiece> pieces;
};

struct CallbackFn {
  std::string id;
  Eigen::Index dimension = 0;
  FunctionSpec::ValueFn value;
  FunctionSpec::GradientFn gradient;
  bool monotone = false;
};

// Alternative order matches FunctionKind.
struct FunctionNode {
  std::variant<LinearFn, QuadraticFn, QuadraticFractionalFn, CobbDouglasFn,
               LogLinearFn, AffineFn, EnvelopeFn, CallbackFn>
      params;
};

/// Index of the envelope piece attaining the extremum at x.
std::size_t active_piece(const EnvelopeFn& env, const Vec& x);

/// Central-difference gradient, used by tests and the monotonicity checks.
Vec finite_difference_gradient(const FunctionSpec& f, const Vec& x,
                               double step = 1e-6);

}  // namespace iirl
