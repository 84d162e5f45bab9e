#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "iirl/function.hpp"

namespace iirl {

struct OptimumPoint {
  Vec point;
  double objective = 0.0;
  /// Projected-gradient stationarity ||x - Proj(x + grad u(x))||.
  double kkt_residual = 0.0;
  bool active = false;
  std::size_t iterations = 0;
  /// Index of the start that produced the point (0 = warm start if given).
  std::size_t start_index = 0;
};

struct MaximizeOptions {
  double kkt_tol = 1e-6;
  std::size_t max_iters = 5000;
  std::size_t n_starts = 8;
  std::uint64_t seed = 0;
  double activity_tol = 1e-6;
  /// Extra start tried before the random ones.
  std::optional<Vec> warm_start;
  /// Use exact solutions where the pair (u, g) has one (linear or
  /// Cobb-Douglas/log-linear utility under a linear budget).
  bool use_closed_form = true;
  /// Under a linear budget, also start from every vertex gamma / p_i e_i.
  bool vertex_starts = true;
};

/// Euclidean projection onto {x >= 0 : g(x) <= gamma}. Exact for linear g;
/// for other convex g a multiplier bisection with an inner projected descent.
Vec project_onto_budget(const FunctionSpec& g, double gamma, const Vec& y);

/// Upper corner of the box containing {x >= 0 : g(x) <= gamma} for monotone g:
/// coordinate i is sup{s : g(s e_i) <= gamma}.
Vec feasible_box(const FunctionSpec& g, double gamma);

/// argmax u(x) s.t. g(x) <= gamma, x >= 0 by multi-start spectral projected
/// gradient ascent. Starts are tried in order (warm start, vertices, random);
/// a later start replaces the incumbent only if strictly better.
OptimumPoint maximize_concave(const FunctionSpec& u, const FunctionSpec& g,
                              double gamma, const MaximizeOptions& opts = {});

/// Exhaustive search over a uniform grid_n^m grid of feasible_box, keeping
/// only feasible points. Independent oracle for tests; m <= 3.
OptimumPoint grid_oracle_maximize(const FunctionSpec& u, const FunctionSpec& g,
                                  double gamma, std::size_t grid_n);

}  // namespace iirl
