#include "iirl/lp.hpp"

#include <cmath>
#include <limits>

#include "iirl/errors.hpp"

namespace iirl {

namespace {

constexpr const char* kWhere = "optim.solve_feasibility";
constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;
constexpr std::size_t kDegenerateBeforeBland = 50;

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DenseSimplex {
 public:
  DenseSimplex(Tableau tableau, std::vector<Eigen::Index> basis, std::size_t max_pivots)
      : t_(std::move(tableau)), basis_(std::move(basis)), max_pivots_(max_pivots) {
    rhs_ = t_.cols() - 1;
    forbidden_.assign(static_cast<std::size_t>(rhs_), false);
  }

  Tableau& tableau() { return t_; }
  Eigen::RowVectorXd& objective() { return z_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  std::vector<bool>& forbidden() { return forbidden_; }
  Eigen::Index rhs_col() const { return rhs_; }
  std::size_t pivots() const { return pivots_; }

  void set_costs(const Eigen::RowVectorXd& costs) {
    // Reduced costs c - c_B B^{-1} A for the current basis.
    z_ = Eigen::RowVectorXd::Zero(t_.cols());
    z_.head(rhs_) = costs;
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      const double cb = costs[basis_[static_cast<std::size_t>(r)]];
      if (cb != 0.0) z_ -= cb * t_.row(r);
    }
  }

  // Minimises the current objective. Returns false on unboundedness.
  bool run() {
    std::size_t degenerate = 0;
    bool bland = false;
    while (true) {
      if (pivots_ >= max_pivots_)
        throw Error(kWhere, "simplex pivot limit reached (cycling or oversized problem)");
      Eigen::Index enter = -1;
      double best = -kCostEps;
      for (Eigen::Index j = 0; j < rhs_; ++j) {
        if (forbidden_[static_cast<std::size_t>(j)]) continue;
        if (z_[j] < best) {
          enter = j;
          if (bland) break;
          best = z_[j];
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < t_.rows(); ++r) {
        const double a = t_(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = t_(r, rhs_) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      if (best_ratio <= 1e-14) {
        if (++degenerate > kDegenerateBeforeBland) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double fz = z_[c];
    if (fz != 0.0) z_ -= fz * t_.row(r);
    basis_[static_cast<std::size_t>(r)] = c;
    ++pivots_;
  }

 private:
  Tableau t_;
  Eigen::RowVectorXd z_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> forbidden_;
  Eigen::Index rhs_ = 0;
  std::size_t max_pivots_;
  std::size_t pivots_ = 0;
};

}  // namespace

double min_row_slack(const LinearFeasibilityProblem& p, const Vec& x) {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& row : p.rows) {
    const double lhs = row.coeffs.dot(x);
    const double s = row.sense == RowSense::less_equal ? row.rhs - lhs : lhs - row.rhs;
    slack = std::min(slack, s);
  }
  if (p.floors.size() == x.size())
    for (Eigen::Index i = 0; i < x.size(); ++i) slack = std::min(slack, x[i] - p.floors[i]);
  return slack;
}

FeasibilityResult solve_feasibility(const LinearFeasibilityProblem& p,
                                    const FeasibilityOptions& opts) {
  const Eigen::Index n = p.n_vars;
  if (n < 1) throw SchemaError(kWhere, "problem has no variables");
  const Vec floors = p.floors.size() == 0 ? Vec::Zero(n) : p.floors;
  if (floors.size() != n) throw SchemaError(kWhere, "floors length differs from n_vars");

  FeasibilityResult result;
  const auto m = static_cast<Eigen::Index>(p.rows.size());

  // Rows in <= form over the shifted variables y = x - floors >= 0.
  Mat A(m, n);
  Vec b(m);
  double max_coef = 0.0, min_coef = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = p.rows[static_cast<std::size_t>(i)];
    if (row.coeffs.size() != n)
      throw SchemaError(kWhere, "row " + std::to_string(i) + " has the wrong number of coefficients");
    if (!row.coeffs.allFinite() || !std::isfinite(row.rhs))
      throw SchemaError(kWhere, "row " + std::to_string(i) + " has non-finite entries");
    const double sign = row.sense == RowSense::less_equal ? 1.0 : -1.0;
    A.row(i) = sign * row.coeffs.transpose();
    b[i] = sign * row.rhs - A.row(i).dot(floors);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = std::abs(row.coeffs[j]);
      if (a > 0.0) {
        max_coef = std::max(max_coef, a);
        min_coef = std::min(min_coef, a);
      }
    }
  }
  if (max_coef > 0.0 && max_coef / min_coef > 1e12)
    result.warnings.push_back("ill-conditioned rows: coefficient magnitudes span more than 1e12");

  if (m == 0) {
    result.feasible = true;
    result.witness = floors;
    result.min_slack = 0.0;
    return result;
  }

  std::vector<bool> flipped(static_cast<std::size_t>(m));
  Eigen::Index n_flipped = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    flipped[static_cast<std::size_t>(i)] = b[i] < 0.0;
    if (b[i] < 0.0) ++n_flipped;
  }

  // Columns: y (n) | slack or surplus per row (m) | artificial per flipped row.
  const Eigen::Index cols = n + m + n_flipped;
  Tableau t = Tableau::Zero(m, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  std::vector<Eigen::Index> identity_col(static_cast<std::size_t>(m));
  Eigen::Index next_art = n + m;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool f = flipped[static_cast<std::size_t>(i)];
    const double s = f ? -1.0 : 1.0;
    t.row(i).head(n) = s * A.row(i);
    t(i, n + i) = s;
    t(i, cols) = s * b[i];
    if (f) {
      t(i, next_art) = 1.0;
      basis[static_cast<std::size_t>(i)] = next_art;
      identity_col[static_cast<std::size_t>(i)] = next_art;
      ++next_art;
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
      identity_col[static_cast<std::size_t>(i)] = n + i;
    }
  }

  DenseSimplex simplex(std::move(t), std::move(basis), opts.max_pivots);

  // Phase 1: minimise the sum of artificials.
  Eigen::RowVectorXd phase1 = Eigen::RowVectorXd::Zero(cols);
  for (Eigen::Index j = n + m; j < cols; ++j) phase1[j] = 1.0;
  simplex.set_costs(phase1);
  simplex.run();
  const double residual = -simplex.objective()[cols];
  result.phase1_residual = std::max(0.0, residual);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();

  if (residual > opts.tolerance * scale) {
    result.feasible = false;
    // Dual prices from the reduced costs of each row's initial identity column.
    Vec y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double d = simplex.objective()[identity_col[static_cast<std::size_t>(i)]];
      const bool f = flipped[static_cast<std::size_t>(i)];
      const double pi = f ? 1.0 - d : -d;
      y[i] = f ? pi : -pi;
      if (std::abs(y[i]) < 1e-14) y[i] = 0.0;
    }
    result.farkas = y;
    result.pivots = simplex.pivots();
    return result;
  }

  // Drive zero-level artificials out of the basis; rows where that is
  // impossible are redundant and keep a (zero) artificial.
  auto& tab = simplex.tableau();
  for (Eigen::Index r = 0; r < m; ++r) {
    if (simplex.basis()[static_cast<std::size_t>(r)] < n + m) continue;
    Eigen::Index c = -1;
    double best = 1e-9;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (std::abs(tab(r, j)) > best) {
        best = std::abs(tab(r, j));
        c = j;
      }
    }
    if (c >= 0) simplex.pivot(r, c);
  }
  for (Eigen::Index j = n + m; j < cols; ++j) simplex.forbidden()[static_cast<std::size_t>(j)] = true;

  // Phase 2: canonical witness minimising costs'(x - floors).
  Vec costs = opts.phase2_costs.size() == n ? opts.phase2_costs : Vec::Ones(n);
  if ((costs.array() <= 0.0).any())
    throw SchemaError(kWhere, "phase-2 costs must be positive");
  Eigen::RowVectorXd phase2 = Eigen::RowVectorXd::Zero(cols);
  phase2.head(n) = costs.transpose();
  simplex.set_costs(phase2);
  if (!simplex.run()) throw Error(kWhere, "phase 2 unbounded despite positive costs");

  Vec shifted = Vec::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index j = simplex.basis()[static_cast<std::size_t>(r)];
    if (j < n) shifted[j] = std::max(0.0, tab(r, simplex.rhs_col()));
  }
  result.feasible = true;
  result.witness = floors + shifted;
  result.min_slack = min_row_slack(p, result.witness);
  result.pivots = simplex.pivots();
  if (result.min_slack < -opts.tolerance * scale)
    result.warnings.push_back("witness violates a row by " + std::to_string(-result.min_slack));
  return result;
}

}  // namespace iirl
