#include <doctest.h>

#include "helpers.hpp"
#include "iirl/errors.hpp"
#include "iirl/irl_strategy.hpp"
#include "iirl/synthetic.hpp"

using namespace iirl;
using iirl::test::vec;

namespace {

// u_1 = x1, u_2 = x2 with x_1 = (1, 2), x_2 = (2, 1): each response is
// strictly better for the other period's utility.
Dataset crossed_linear() {
  return strategy_dataset({vec({1.0, 2.0}), vec({2.0, 1.0})},
                          {FunctionSpec::linear(vec({1.0, 0.0})), FunctionSpec::linear(vec({0.0, 1.0}))});
}

// Exact optima of a_t'x under (1, 1)'x <= gamma_t: vertices gamma_t e_{i*}.
struct VertexData {
  Dataset d;
  std::vector<double> gamma;
};

VertexData vertex_pair() {
  VertexData v;
  v.gamma = {1.0, 1.5};
  v.d = strategy_dataset({vec({1.0, 0.0}), vec({0.0, 1.5})},
                         {FunctionSpec::linear(vec({2.0, 1.0})), FunctionSpec::linear(vec({1.0, 2.0}))});
  return v;
}

const FunctionSpec& unit_prices() {
  static const FunctionSpec g = FunctionSpec::linear(vec({1.0, 1.0}));
  return g;
}

std::vector<Vec> responses_of(const Dataset& d) {
  std::vector<Vec> xs;
  for (const auto& e : d.entries) xs.push_back(e.response);
  return xs;
}

std::vector<FunctionSpec> utilities_of(const Dataset& d) {
  std::vector<FunctionSpec> us;
  for (const auto& e : d.entries) us.push_back(e.function);
  return us;
}

}  // namespace

TEST_SUITE("irl_strategy") {
  TEST_CASE("K=1 is feasible at the floors and passes transformed GARP") {
    const Dataset d = strategy_dataset({vec({0.3, 0.7})}, {FunctionSpec::cobb_douglas(vec({0.4, 0.5}))});
    const StrategyResult r = strategy_feasibility_test(d);
    REQUIRE(r.lp.feasible);
    CHECK(r.lp.witness[0] == doctest::Approx(1.0));
    CHECK(r.lp.witness[1] == doctest::Approx(1.0));
    CHECK(garp_transformed(d).passes);
  }

  TEST_CASE("crossed linear utilities: infeasible, 2-cycle, negative margin") {
    const Dataset d = crossed_linear();
    CHECK_FALSE(strategy_feasibility_test(d).lp.feasible);
    const GarpResult g = garp_transformed(d);
    CHECK_FALSE(g.passes);
    REQUIRE(g.cycle);
    CHECK(g.cycle->size() == 2);
    // lambda_k = 1 for both; each term is 0 - 1 * (u_k(x_j) - u_k(x_k)) = -1.
    const MarginReport m = margin_strategy(responses_of(d), utilities_of(d), {}, unit_prices());
    CHECK(m.value == doctest::Approx(-1.0).epsilon(1e-15));
  }

  TEST_CASE("vertex data: feasible, anchored and rationalised") {
    const VertexData v = vertex_pair();
    CHECK(garp_transformed(v.d).passes);
    const StrategyResult r = strategy_feasibility_test(v.d);
    REQUIRE(r.lp.feasible);
    REQUIRE(r.reconstruction);
    const BudgetReconstruction& rec = *r.reconstruction;
    for (std::size_t t = 0; t < 2; ++t) {
      const double gbar = rec.thresholds[static_cast<Eigen::Index>(t)];
      CHECK(std::abs(rec.envelope.value(v.d.response(t)) - gbar) <= 1e-8);
      const double own = v.d.function(t).value(v.d.response(t));
      for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
          const Vec x = vec({3.0 * i / 100.0, 3.0 * j / 100.0});
          if (rec.envelope.value(x) <= gbar) CHECK(v.d.function(t).value(x) <= own + 1e-6);
        }
    }
  }

  TEST_CASE("vertex data margin by hand") {
    // lambda = p_i / a_i on the support: 1/2 for both periods.
    // (0, 1): 1 - 1.5 - 0.5 (1 - 3) = 0.5;  (1, 0): 1.5 - 1 - 0.5 (1.5 - 2) = 0.75.
    const VertexData v = vertex_pair();
    const MarginReport m = margin_strategy(responses_of(v.d), utilities_of(v.d), v.gamma, unit_prices());
    CHECK(m.multipliers[0] == 0.5);
    CHECK(m.multipliers[1] == 0.5);
    CHECK(m.pair_terms(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.pair_terms(1, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(m.value == doctest::Approx(0.5).epsilon(1e-15));
    REQUIRE(m.threshold_value);
    CHECK(*m.threshold_value == doctest::Approx(m.value).epsilon(1e-15));
  }

  TEST_CASE("two identical observations have zero margin") {
    const FunctionSpec u = FunctionSpec::cobb_douglas(vec({0.3, 0.6}));
    const Vec x = vec({0.4, 0.8});
    const MarginReport m = margin_strategy({x, x}, {u, u}, {1.2, 1.2}, unit_prices());
    CHECK(m.value == 0.0);
    CHECK(*m.threshold_value == 0.0);
    CHECK_THROWS_AS(margin_strategy({x}, {u}, {}, unit_prices()), UndefinedMargin);
  }

  TEST_CASE("rational Cobb-Douglas data: both margin forms agree and are nonnegative") {
    Rng rng(51);
    for (int n = 0; n < 5; ++n) {
      const GeneratedStrategy s = rational_strategy_dataset(rng, 6, 3);
      const MarginReport m = margin_strategy(responses_of(s.data), utilities_of(s.data), s.thresholds, s.budget);
      CHECK(m.value >= -1e-12);
      CHECK(*m.threshold_value == doctest::Approx(m.value).epsilon(1e-10));
    }
  }

  TEST_CASE("g_best interpolates the thresholds and is convex for linear utilities") {
    const VertexData v = vertex_pair();
    const FunctionSpec gb = best_budget_estimate(v.d, unit_prices(), v.gamma);
    CHECK(gb.value(v.d.response(0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gb.value(v.d.response(1)) == doctest::Approx(1.5).epsilon(1e-15));
    Rng rng(52);
    for (int n = 0; n < 200; ++n) {
      const Vec a = iirl::test::random_point(rng, 2, 0.0, 3.0);
      const Vec b = iirl::test::random_point(rng, 2, 0.0, 3.0);
      const double w = rng.uniform();
      CHECK(gb.value(w * a + (1 - w) * b) <= w * gb.value(a) + (1 - w) * gb.value(b) + 1e-12);
    }
    const Dataset one = strategy_dataset({v.d.response(0)}, {v.d.function(0)});
    CHECK(best_budget_estimate(one, unit_prices(), {1.0}).value(v.d.response(0)) == doctest::Approx(1.0));
  }

  TEST_CASE("every reconstructed budget shares one base function") {
    Rng rng(53);
    const GeneratedStrategy s = rational_strategy_dataset(rng, 5, 2);
    const StrategyResult r = strategy_feasibility_test(s.data);
    REQUIRE(r.reconstruction);
    CHECK(r.reconstruction->envelope.kind() == FunctionKind::envelope);
    CHECK(r.reconstruction->thresholds.size() == 5);
    const auto& env = std::get<EnvelopeFn>(r.reconstruction->envelope.node().params);
    CHECK(env.mode == EnvelopeMode::max);
    CHECK(env.pieces.size() == 5);
  }
}
