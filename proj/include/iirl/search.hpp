#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "iirl/function.hpp"

namespace iirl {

struct CoordinateSearchOptions {
  /// Initial pattern step; <= 0 means 0.1 * max(1, ||x0||_inf).
  double initial_step = 0.0;
  double min_step = 1e-9;
  double shrink = 0.5;
  std::size_t max_evals = 200000;
  /// Random feasible restarts around x0 in addition to x0 itself.
  std::size_t n_starts = 1;
  double restart_radius = 0.0;
  std::uint64_t seed = 0;
};

struct CoordinateSearchResult {
  Vec x;
  double objective = 0.0;
  std::size_t evaluations = 0;
};

/// Derivative-free compass search: tries +-step along each coordinate,
/// accepts feasible improvements, halves the step when a sweep fails.
/// `constraint(x) <= 0` defines feasibility; x0 must be feasible.
CoordinateSearchResult coordinate_search_minimize(
    const std::function<double(const Vec&)>& objective,
    const std::function<double(const Vec&)>& constraint, const Vec& x0,
    const CoordinateSearchOptions& opts = {});

}  // namespace iirl
