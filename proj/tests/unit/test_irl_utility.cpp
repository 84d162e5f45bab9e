#include <doctest.h>

#include "helpers.hpp"
#include "iirl/errors.hpp"
#include "iirl/irl_utility.hpp"
#include "iirl/synthetic.hpp"

using namespace iirl;
using iirl::test::vec;

namespace {

Dataset utility_data(const std::vector<Vec>& prices, const std::vector<Vec>& responses) {
  Dataset d;
  d.mode = DatasetMode::utility_test;
  for (std::size_t t = 0; t < prices.size(); ++t)
    d.entries.push_back({FunctionSpec::linear(prices[t], -1.0), responses[t]});
  return d;
}

// Exact optima of sqrt(x1 x2) under (1, 2)'x <= 1 and (2, 1)'x <= 1.
Dataset cobb_douglas_pair() {
  return utility_data({vec({1.0, 2.0}), vec({2.0, 1.0})}, {vec({0.5, 0.25}), vec({0.25, 0.5})});
}

// Each bundle costs 1/2 at the other's prices: strictly inside the other budget.
Dataset warp_violation() {
  return utility_data({vec({2.0, 1.0}), vec({1.0, 2.0})}, {vec({0.5, 0.0}), vec({0.0, 0.5})});
}

const FunctionSpec& sqrt_utility() {
  static const FunctionSpec u = FunctionSpec::cobb_douglas(vec({0.5, 0.5}));
  return u;
}

}  // namespace

TEST_SUITE("irl_utility") {
  TEST_CASE("K=1 passes GARP and has the floor witness") {
    const Dataset d = utility_data({vec({1.0, 1.0})}, {vec({0.5, 0.5})});
    CHECK(garp_check(d).passes);
    const AfriatResult r = afriat_test(d);
    REQUIRE(r.lp.feasible);
    CHECK(r.lp.witness[0] == doctest::Approx(1.0));
    CHECK(r.lp.witness[1] == doctest::Approx(1.0));
  }

  TEST_CASE("Cobb-Douglas pair passes GARP and the Afriat LP") {
    const Dataset d = cobb_douglas_pair();
    const GarpResult g = garp_check(d);
    CHECK(g.passes);
    CHECK_FALSE(g.cycle.has_value());
    const AfriatResult r = afriat_test(d);
    REQUIRE(r.lp.feasible);
    REQUIRE(r.reconstruction);
    const FunctionSpec& env = r.reconstruction->envelope;
    // The reconstruction rationalises the data on a grid of each budget set.
    for (std::size_t t = 0; t < 2; ++t) {
      const double at = env.value(d.response(t));
      CHECK(at == doctest::Approx(r.reconstruction->levels[static_cast<Eigen::Index>(t)]).epsilon(1e-12));
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
          const Vec x = vec({i / 100.0, j / 100.0});
          if (d.function(t).value(x) <= 0.0) CHECK(env.value(x) <= at + 1e-6);
        }
    }
  }

  TEST_CASE("WARP violation fails with a 2-cycle and an infeasible LP") {
    const Dataset d = warp_violation();
    const GarpResult g = garp_check(d);
    CHECK_FALSE(g.passes);
    REQUIRE(g.cycle);
    CHECK(g.cycle->size() == 2);
    CHECK(g.direct(0, 1));
    CHECK(g.direct(1, 0));
    CHECK_FALSE(afriat_test(d).lp.feasible);
  }

  TEST_CASE("u_best on the Cobb-Douglas pair") {
    const Dataset d = cobb_douglas_pair();
    const double u0 = std::sqrt(0.125);
    // grad u(x_t) = sqrt(1/8) alpha_t, so lambda_t = sqrt(1/8).
    const Vec lambda = utility_multipliers(d, sqrt_utility());
    CHECK(lambda[0] == doctest::Approx(u0).epsilon(1e-14));
    CHECK(lambda[1] == doctest::Approx(u0).epsilon(1e-14));
    const FunctionSpec best = best_utility_estimate(d, sqrt_utility());
    CHECK(std::abs(best.value(d.response(0)) - u0) <= 1e-15);
    CHECK(std::abs(best.value(d.response(1)) - u0) <= 1e-15);
    // Both pieces equal sqrt(1/8) (alpha_t'x) at x = (1/3, 1/3).
    CHECK(best.value(vec({1.0 / 3.0, 1.0 / 3.0})) == doctest::Approx(u0).epsilon(1e-14));
  }

  TEST_CASE("u_best interpolates linear utilities at the anchors") {
    Rng rng(41);
    const FunctionSpec u = FunctionSpec::linear(vec({1.0, 2.0, 0.5}));
    std::vector<Vec> prices, xs;
    // Linear optima sit on the vertex with the best utility per unit price.
    for (int t = 0; t < 6; ++t) {
      prices.push_back(iirl::test::random_point(rng, 3, 0.5, 2.0));
      Eigen::Index i = 0;
      u.gradient(Vec::Zero(3)).cwiseQuotient(prices.back()).maxCoeff(&i);
      Vec x = Vec::Zero(3);
      x[i] = 1.0 / prices.back()[i];
      xs.push_back(x);
    }
    const Dataset d = utility_data(prices, xs);
    const FunctionSpec best = best_utility_estimate(d, u);
    for (std::size_t t = 0; t < 6; ++t) CHECK(best.value(xs[t]) == doctest::Approx(u.value(xs[t])).epsilon(1e-13));
  }

  TEST_CASE("u_best is concave along random chords") {
    Rng rng(42);
    const Generated g = rational_utility_dataset(rng, 6, 2, UtilityFamily::cobb_douglas);
    const FunctionSpec best = best_utility_estimate(g.data, g.truth);
    for (int n = 0; n < 200; ++n) {
      const Vec a = iirl::test::random_point(rng, 2, 0.0, 2.0);
      const Vec b = iirl::test::random_point(rng, 2, 0.0, 2.0);
      const double w = rng.uniform();
      CHECK(best.value(w * a + (1 - w) * b) >= w * best.value(a) + (1 - w) * best.value(b) - 1e-12);
    }
  }

  TEST_CASE("psi_u values") {
    // Pair term u(x_j) - u(x_k) - lambda_k g_k(x_j) = -sqrt(1/8) / 4 both ways.
    const MarginReport r = margin_utility(cobb_douglas_pair(), sqrt_utility());
    CHECK(r.value == doctest::Approx(-std::sqrt(0.125) / 4.0).epsilon(1e-14));
    CHECK(r.value == off_diagonal_extremum(r.pair_terms, true));

    const Dataset same = utility_data({vec({1.0, 2.0}), vec({1.0, 2.0})}, {vec({0.5, 0.25}), vec({0.5, 0.25})});
    CHECK(std::abs(margin_utility(same, sqrt_utility()).value) <= 1e-15);

    // u = x1 + x2 rates both WARP bundles equally; on the support lambda = 1/2,
    // and each term is 0 - 1/2 * (-1/2).
    const MarginReport w = margin_utility(warp_violation(), FunctionSpec::linear(vec({1.0, 1.0})));
    CHECK(w.value == doctest::Approx(0.25).epsilon(1e-14));

    CHECK_THROWS_AS(margin_utility(utility_data({vec({1.0, 1.0})}, {vec({0.5, 0.5})}), sqrt_utility()),
                    UndefinedMargin);
  }

  TEST_CASE("psi_u is unchanged by adding a constant to u") {
    Rng rng(43);
    const Generated g = rational_utility_dataset(rng, 5, 2, UtilityFamily::log_linear);
    const FunctionSpec shifted = FunctionSpec::affine(g.truth, 1.0, Vec::Zero(2), 3.5);
    CHECK(margin_utility(g.data, shifted).value ==
          doctest::Approx(margin_utility(g.data, g.truth).value).epsilon(1e-12));
    CHECK(margin_utility(g.data, g.truth).value <= 1e-12);
  }

  TEST_CASE("integrated squared error") {
    Box unit{vec({0.0, 0.0}), vec({1.0, 1.0})};
    const FunctionSpec& u = sqrt_utility();
    CHECK(integrated_squared_error(u, u, unit, 50) == 0.0);
    const FunctionSpec plus_one = FunctionSpec::affine(u, 1.0, Vec::Zero(2), 1.0);
    CHECK(integrated_squared_error(plus_one, u, unit, 50) == doctest::Approx(1.0).epsilon(1e-12));
    const FunctionSpec u3 = FunctionSpec::linear(Vec::Ones(3));
    CHECK_THROWS_AS(integrated_squared_error(u3, u3, Box{Vec::Zero(3), Vec::Ones(3)}, 5), UnsupportedDimension);
  }

  TEST_CASE("witnesses satisfy every Afriat row and scale") {
    Rng rng(44);
    const Generated g = rational_utility_dataset(rng, 7, 3, UtilityFamily::cobb_douglas);
    const AfriatResult r = afriat_test(g.data);
    REQUIRE(r.lp.feasible);
    const Mat cost = constraint_costs(g.data);
    const LinearFeasibilityProblem p = afriat_system(cost);
    CHECK(min_row_slack(p, r.lp.witness) >= -1e-9);
    CHECK(min_row_slack(p, 2.5 * r.lp.witness) >= -1e-9);
  }
}
