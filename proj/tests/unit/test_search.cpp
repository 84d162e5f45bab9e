#include <doctest.h>

#include "helpers.hpp"
#include "iirl/errors.hpp"
#include "iirl/search.hpp"

using namespace iirl;
using iirl::test::vec;

TEST_SUITE("optim") {
  TEST_CASE("minimiser at the start stays put") {
    const Vec x0 = vec({0.3, -1.2});
    const auto r = coordinate_search_minimize([&](const Vec& x) { return (x - x0).squaredNorm(); },
                                              [](const Vec&) { return -1.0; }, x0);
    CHECK(r.x == x0);
    CHECK(r.objective == 0.0);
  }

  TEST_CASE("1-D projection: min (x - 1)^2 s.t. x <= 0") {
    const auto r = coordinate_search_minimize([](const Vec& x) { return std::pow(x[0] - 1.0, 2); },
                                              [](const Vec& x) { return x[0]; }, vec({-3.0}));
    CHECK(std::abs(r.x[0]) <= 1e-6);
    CHECK(r.x[0] <= 0.0);
  }

  TEST_CASE("never returns worse than the start and is deterministic") {
    auto f = [](const Vec& x) { return std::pow(x[0] - 2.0, 2) + 3.0 * std::pow(x[1] + 1.0, 2); };
    auto c = [](const Vec& x) { return x[0] + x[1] - 0.5; };
    CoordinateSearchOptions o;
    o.n_starts = 4;
    o.seed = 9;
    const auto a = coordinate_search_minimize(f, c, vec({0.0, 0.0}), o);
    const auto b = coordinate_search_minimize(f, c, vec({0.0, 0.0}), o);
    CHECK(a.objective <= f(vec({0.0, 0.0})));
    CHECK(c(a.x) <= 0.0);
    CHECK(a.x == b.x);
  }

  TEST_CASE("infeasible start is rejected") {
    CHECK_THROWS_AS(coordinate_search_minimize([](const Vec& x) { return x.squaredNorm(); },
                                               [](const Vec&) { return 1.0; }, vec({1.0})),
                    InfeasibleStart);
  }
}
