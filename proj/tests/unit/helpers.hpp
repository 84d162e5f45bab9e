#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "iirl/function.hpp"
#include "iirl/random.hpp"

namespace iirl::test {

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Vec random_point(Rng& rng, Eigen::Index m, double lo, double hi) {
  Vec x(m);
  for (Eigen::Index i = 0; i < m; ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

// ||a - b|| <= tol * max(1, ||b||)
inline bool close_rel(const Vec& a, const Vec& b, double tol) {
  return (a - b).norm() <= tol * std::max(1.0, b.norm());
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("iirl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace iirl::test
