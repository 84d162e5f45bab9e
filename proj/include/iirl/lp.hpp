#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "iirl/function.hpp"

namespace iirl {

enum class RowSense { less_equal, greater_equal };

struct LinearRow {
  Vec coeffs;
  double rhs = 0.0;
  RowSense sense = RowSense::less_equal;
};

/// Rows a'x (<= | >=) rhs over x >= floors. Positive floors encode the
/// "positive reals" requirement of revealed-preference systems, which a
/// linear program cannot express as a strict inequality.
struct LinearFeasibilityProblem {
  Eigen::Index n_vars = 0;
  std::vector<LinearRow> rows;
  Vec floors;
};

struct FeasibilityOptions {
  /// Phase-1 optimum above this (scaled by 1 + max|rhs|) means infeasible.
  double tolerance = 1e-9;
  /// Phase-2 objective: minimise costs'(x - floors). Defaults to all ones,
  /// which returns the witness closest to the floors. Must be positive.
  Vec phase2_costs;
  std::size_t max_pivots = 200000;
};

struct FeasibilityResult {
  bool feasible = false;
  Vec witness;
  /// Smallest row slack at the witness (>= -tolerance when feasible).
  double min_slack = 0.0;
  /// Phase-1 optimum: the least total artificial infeasibility.
  double phase1_residual = 0.0;
  /// Farkas multipliers y >= 0 on the rows written in <= form and shifted by
  /// the floors: y'A >= 0 and y'(rhs - A*floors) < 0. Empty when feasible.
  Vec farkas;
  std::size_t pivots = 0;
  std::vector<std::string> warnings;
};

/// Two-phase dense simplex. Phase 1 decides feasibility (and yields a Farkas
/// certificate on failure); phase 2 picks a canonical witness.
FeasibilityResult solve_feasibility(const LinearFeasibilityProblem& p,
                                    const FeasibilityOptions& opts = {});

/// Smallest slack of every row at x; negative means violated.
double min_row_slack(const LinearFeasibilityProblem& p, const Vec& x);

}  // namespace iirl
