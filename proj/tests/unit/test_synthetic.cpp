#include <doctest.h>

#include "helpers.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/irl_utility.hpp"
#include "iirl/synthetic.hpp"

using namespace iirl;

TEST_SUITE("synthetic") {
  TEST_CASE("rational utility datasets are exact optima on their budget lines") {
    Rng rng(81);
    for (UtilityFamily fam : {UtilityFamily::cobb_douglas, UtilityFamily::log_linear}) {
      const Generated g = rational_utility_dataset(rng, 8, 3, fam);
      REQUIRE(g.data.horizon() == 8);
      CHECK(garp_check(g.data).passes);
      for (std::size_t t = 0; t < 8; ++t) {
        CHECK(std::abs(g.data.function(t).value(g.data.response(t))) <= 1e-12);
        CHECK(g.data.response(t).minCoeff() > 0.0);
      }
    }
  }

  TEST_CASE("irrational utility datasets fail GARP and stay on the budget lines") {
    Rng rng(82);
    const Generated g = rational_utility_dataset(rng, 8, 2, UtilityFamily::cobb_douglas);
    const Dataset bad = irrational_utility_dataset(rng, g.data);
    CHECK_FALSE(garp_check(bad).passes);
    CHECK_FALSE(afriat_test(bad).lp.feasible);
    for (std::size_t t = 0; t < 8; ++t) CHECK(std::abs(bad.function(t).value(bad.response(t))) <= 1e-12);
  }

  TEST_CASE("strategy datasets: rational passes, perturbed fails") {
    Rng rng(83);
    const GeneratedStrategy s = rational_strategy_dataset(rng, 6, 2);
    CHECK(garp_transformed(s.data).passes);
    for (std::size_t t = 0; t < 6; ++t)
      CHECK(s.budget.value(s.data.response(t)) == doctest::Approx(s.thresholds[t]).epsilon(1e-12));
    const Dataset bad = irrational_strategy_dataset(rng, s.data);
    CHECK_FALSE(garp_transformed(bad).passes);
  }

  TEST_CASE("Cobb-Douglas scenarios") {
    Rng rng(84);
    const MaskingProblem p = cobb_douglas_scenario(rng, 5, 3, 0.4);
    CHECK(p.horizon() == 5);
    CHECK(p.eta == 0.4);
    for (const auto& u : p.utilities) {
      REQUIRE(u.kind() == FunctionKind::cobb_douglas);
      CHECK(std::get<CobbDouglasFn>(u.node().params).exponents.sum() == doctest::Approx(0.9).epsilon(1e-14));
    }
    for (double g : p.thresholds) {
      CHECK(g >= 1.0);
      CHECK(g <= 2.0);
    }
  }

  TEST_CASE("quadratic scenarios are increasing on the search box") {
    Rng rng(85);
    const MaskingProblem p = quadratic_scenario(rng, 6, 2, 0.2);
    const Vec price = std::get<LinearFn>(p.budget.node().params).coeffs;
    for (const auto& u : p.utilities)
      for (int n = 0; n < 100; ++n) {
        Vec x(2);
        for (Eigen::Index i = 0; i < 2; ++i) x[i] = rng.uniform(0.0, 4.0 / price[i]);
        CHECK(u.gradient(x).minCoeff() > 0.0);
      }
  }

  TEST_CASE("generators are reproducible from the seed") {
    Rng a(86), b(86);
    const MaskingProblem p = quadratic_scenario(a, 4, 3, 0.5);
    const MaskingProblem q = quadratic_scenario(b, 4, 3, 0.5);
    CHECK(p.thresholds == q.thresholds);
    CHECK(p.budget == q.budget);
    for (std::size_t t = 0; t < 4; ++t) CHECK(p.utilities[t] == q.utilities[t]);
  }
}
