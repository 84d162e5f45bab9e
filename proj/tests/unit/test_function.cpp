#include <doctest.h>

#include <vector>

#include "helpers.hpp"
#include "iirl/errors.hpp"
#include "iirl/function.hpp"

using namespace iirl;
using iirl::test::vec;

namespace {

Vec central_difference(const FunctionSpec& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f.value(a) - f.value(b)) / (2.0 * h);
  }
  return g;
}

Mat spd(Rng& rng, Eigen::Index m) {
  Mat B(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) B(i, j) = rng.uniform(-1.0, 1.0);
  return B * B.transpose() + Mat::Identity(m, m);
}

std::vector<FunctionSpec> one_of_each_kind(Rng& rng, Eigen::Index m) {
  std::vector<FunctionSpec> fs;
  fs.push_back(FunctionSpec::linear(iirl::test::random_point(rng, m, 0.5, 2.0), 0.3));
  fs.push_back(FunctionSpec::quadratic(-spd(rng, m), iirl::test::random_point(rng, m, 1.0, 3.0), 0.1));
  fs.push_back(FunctionSpec::quadratic_fractional(spd(rng, m), spd(rng, m), 1.0));
  fs.push_back(FunctionSpec::cobb_douglas(iirl::test::random_point(rng, m, 0.1, 0.6), 1.5));
  fs.push_back(FunctionSpec::log_linear(iirl::test::random_point(rng, m, 0.2, 1.0)));
  fs.push_back(FunctionSpec::affine(fs[3], 2.0, iirl::test::random_point(rng, m, -0.5, 0.5), 1.0));
  std::vector<EnvelopePiece> pieces;
  for (int k = 0; k < 3; ++k) {
    EnvelopePiece p;
    p.level = rng.uniform(0.0, 1.0);
    p.multiplier = rng.uniform(0.5, 2.0);
    p.base = FunctionSpec::linear(iirl::test::random_point(rng, m, 0.5, 2.0), -1.0);
    p.anchor = Vec::Zero(m);
    pieces.push_back(p);
  }
  fs.push_back(FunctionSpec::envelope(EnvelopeMode::min, pieces));
  fs.push_back(FunctionSpec::envelope(EnvelopeMode::max, pieces));
  return fs;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("gradients agree with central differences for every kind") {
    Rng rng(11);
    const Eigen::Index m = 3;
    const auto fs = one_of_each_kind(rng, m);
    FunctionSpec::register_callback(
        "test.sum_sqrt", m, [](const Vec& x) { return x.cwiseSqrt().sum(); },
        [](const Vec& x) { return Vec(0.5 * x.cwiseSqrt().cwiseInverse()); }, true);
    std::vector<FunctionSpec> all = fs;
    all.push_back(FunctionSpec::callback("test.sum_sqrt"));
    for (const auto& f : all) {
      CAPTURE(to_string(f.kind()));
      for (int n = 0; n < 100; ++n) {
        const Vec x = iirl::test::random_point(rng, m, 0.2, 2.0);
        const Vec g = f.gradient(x);
        const Vec fd = central_difference(f, x, 1e-6);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
      }
    }
  }

  TEST_CASE("value_and_gradient matches the separate calls") {
    Rng rng(12);
    for (const auto& f : one_of_each_kind(rng, 2)) {
      const Vec x = iirl::test::random_point(rng, 2, 0.3, 1.5);
      Vec g;
      const double v = f.value_and_gradient(x, g);
      CHECK(v == doctest::Approx(f.value(x)).epsilon(1e-14));
      CHECK(iirl::test::close_rel(g, f.gradient(x), 1e-14));
    }
  }

  TEST_CASE("closed-form values") {
    const Mat Q = 5.0 * Mat::Identity(2, 2), P = 2.0 * Mat::Identity(2, 2);
    CHECK(FunctionSpec::quadratic_fractional(Q, P, 1.0).value(vec({1.0, 0.0})) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(FunctionSpec::cobb_douglas(vec({0.5, 0.5})).value(vec({0.5, 0.25})) ==
          doctest::Approx(std::sqrt(0.125)).epsilon(1e-15));
    CHECK(FunctionSpec::linear(vec({1.0, 1.0}), -1.0).value(vec({0.5, 0.5})) == 0.0);
    CHECK(FunctionSpec::log_linear(vec({1.0, 2.0})).value(vec({1.0, std::exp(1.0)})) ==
          doctest::Approx(2.0));
  }

  TEST_CASE("min envelope lies below and max envelope above every piece") {
    Rng rng(13);
    const auto fs = one_of_each_kind(rng, 2);
    const FunctionSpec& lo = fs[6];
    const FunctionSpec& hi = fs[7];
    const auto& pieces = std::get<EnvelopeFn>(lo.node().params).pieces;
    for (int n = 0; n < 200; ++n) {
      const Vec x = iirl::test::random_point(rng, 2, 0.0, 3.0);
      for (const auto& p : pieces) {
        const double v = p.level + p.multiplier * (p.base.value(x) - p.reference);
        CHECK(lo.value(x) <= v + 1e-15);
        CHECK(hi.value(x) >= v - 1e-15);
      }
    }
  }

  TEST_CASE("kinds flagged monotone do not decrease along componentwise increases") {
    Rng rng(14);
    const Eigen::Index m = 3;
    std::vector<FunctionSpec> fs = {
        FunctionSpec::linear(vec({1.0, 0.5, 2.0})),
        FunctionSpec::cobb_douglas(vec({0.2, 0.3, 0.4})),
        FunctionSpec::log_linear(vec({1.0, 1.0, 0.5})),
    };
    for (const auto& f : fs) {
      REQUIRE(f.monotone());
      for (int n = 0; n < 200; ++n) {
        const Vec x = iirl::test::random_point(rng, m, 0.1, 2.0);
        const Vec y = x + iirl::test::random_point(rng, m, 0.0, 1.0);
        CHECK(f.value(y) >= f.value(x));
      }
    }
    CHECK_FALSE(FunctionSpec::linear(vec({1.0, -1.0})).monotone());
  }

  TEST_CASE("malformed specifications are rejected") {
    CHECK_THROWS_AS(FunctionSpec::linear(Vec()), SchemaError);
    CHECK_THROWS_AS(FunctionSpec::quadratic_fractional(Mat::Identity(2, 2), Mat::Identity(3, 3), 1.0),
                    SchemaError);
    CHECK_THROWS_AS(FunctionSpec::quadratic_fractional(Mat::Identity(2, 2), Mat::Identity(2, 2), 0.0),
                    SchemaError);
    CHECK_THROWS(FunctionSpec::callback("test.never_registered"));
    CHECK_THROWS(FunctionSpec::linear(vec({1.0, 2.0})).value(vec({1.0})));
  }

  TEST_CASE("equality compares parameters") {
    CHECK(FunctionSpec::linear(vec({1.0, 2.0})) == FunctionSpec::linear(vec({1.0, 2.0})));
    CHECK_FALSE(FunctionSpec::linear(vec({1.0, 2.0})) == FunctionSpec::linear(vec({1.0, 2.5})));
    CHECK_FALSE(FunctionSpec::linear(vec({1.0, 2.0})) == FunctionSpec::cobb_douglas(vec({1.0, 2.0})));
  }
}
