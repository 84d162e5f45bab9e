#include <doctest.h>

#include "helpers.hpp"
#include "iirl/errors.hpp"
#include "iirl/sample_complexity.hpp"
#include "iirl/synthetic.hpp"

using namespace iirl;
using iirl::test::vec;

TEST_SUITE("sample_complexity") {
  TEST_CASE("perturbing by zero is the identity, linear stays linear") {
    const FunctionSpec lin = FunctionSpec::linear(vec({1.0, 2.0}), 0.5);
    CHECK(perturb_utility(lin, vec({0.0, 0.0})) == lin);
    const FunctionSpec moved = perturb_utility(lin, vec({0.25, -1.0}));
    CHECK(moved == FunctionSpec::linear(vec({1.25, 1.0}), 0.5));
    const FunctionSpec cd = FunctionSpec::cobb_douglas(vec({0.3, 0.5}));
    const FunctionSpec cd_moved = perturb_utility(cd, vec({0.1, 0.2}));
    const Vec x = vec({0.7, 1.3});
    CHECK(cd_moved.value(x) == doctest::Approx(cd.value(x) + 0.07 + 0.26).epsilon(1e-14));
    CHECK_THROWS_AS(perturb_utility(lin, vec({1.0})), SchemaError);
  }

  TEST_CASE("perturbed gradients match central differences") {
    Mat A = Mat::Zero(2, 2);
    A.diagonal() = vec({-0.4, -0.7});
    const Vec d = vec({0.3, -0.2});
    for (const FunctionSpec& u : {FunctionSpec::quadratic(A, vec({1.0, 2.0})), FunctionSpec::cobb_douglas(vec({0.3, 0.5})),
                                  FunctionSpec::quadratic_fractional(5.0 * Mat::Identity(2, 2), 2.0 * Mat::Identity(2, 2), 1.0)}) {
      const FunctionSpec f = perturb_utility(u, d);
      const Vec x = vec({0.6, 0.9});
      const Vec g = f.gradient(x);
      for (Eigen::Index i = 0; i < 2; ++i) {
        Vec e = Vec::Zero(2);
        e[i] = 1e-6;
        CHECK(g[i] == doctest::Approx((f.value(x + e) - f.value(x - e)) / 2e-6).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("analytic bound edge values") {
    const Mat S = 0.1 * Mat::Identity(2, 2);
    CHECK(analytic_bound(0.0, 1.0, 1.0, S, 3) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(analytic_bound(1.0, 1.0, 1.0, 1e-30 * Mat::Identity(2, 2), 5) == 1.0);
    const double k5 = analytic_bound(0.5, 0.2, 0.3, S, 5);
    const double k10 = analytic_bound(0.5, 0.2, 0.3, S, 10);
    CHECK(k10 < k5);
    CHECK(k10 == doctest::Approx(k5 * k5).epsilon(1e-12));
    // Phi(2 * 1 * 1 * 1 / sqrt(4)) = Phi(1).
    CHECK(analytic_bound(1.0, 1.0, 1.0, 2.0 * Mat::Identity(2, 2), 1) ==
          doctest::Approx(0.8413447460685429).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_bound(1.0, 1.0, 1.0, Mat::Zero(2, 2), 2), ConfigError);
    CHECK_THROWS_AS(analytic_bound(1.0, 1.0, 1.0, S, 0), ConfigError);
  }

  TEST_CASE("gradient Lipschitz constant of a quadratic is 2 ||A||") {
    Mat A = Mat::Zero(2, 2);
    A.diagonal() = vec({-0.4, -1.5});
    const FunctionSpec u = FunctionSpec::quadratic(A, vec({4.0, 6.0}));
    const double L = estimate_gradient_lipschitz({u}, FunctionSpec::linear(vec({1.0, 1.0})), 2.0, 4000, 7);
    CHECK(L <= 3.0 + 1e-12);
    CHECK(L >= 0.95 * 3.0);
  }

  TEST_CASE("pair-term spread for K=2 is |eps_01 - eps_10|") {
    // Linear (2, 1) and (1, 2) at vertices e_1 and 1.5 e_2 under (1, 1)'x:
    // terms 0.5 and 0.75.
    const std::vector<Vec> xs = {vec({1.0, 0.0}), vec({0.0, 1.5})};
    const std::vector<FunctionSpec> us = {FunctionSpec::linear(vec({2.0, 1.0})), FunctionSpec::linear(vec({1.0, 2.0}))};
    CHECK(pair_term_spread(xs, us, {1.0, 1.5}, FunctionSpec::linear(vec({1.0, 1.0}))) ==
          doctest::Approx(0.25).epsilon(1e-14));
  }

  TEST_CASE("curvature ratio of linear utilities is degenerate") {
    const std::vector<Vec> xs = {vec({1.0, 0.0}), vec({0.0, 1.0})};
    const std::vector<FunctionSpec> us = {FunctionSpec::linear(vec({2.0, 1.0})), FunctionSpec::linear(vec({1.0, 2.0}))};
    CHECK_THROWS_AS(curvature_ratio(xs, us, FunctionSpec::linear(vec({1.0, 1.0}))), KappaDegenerate);
  }

  TEST_CASE("Wilson score interval") {
    const Interval a = wilson_interval(0, 10);
    CHECK(a.lower == 0.0);
    CHECK(a.upper == doctest::Approx(0.2775328).epsilon(1e-6));
    const Interval b = wilson_interval(5, 10);
    CHECK(b.lower == doctest::Approx(0.2365931).epsilon(1e-6));
    CHECK(b.upper == doctest::Approx(0.7634069).epsilon(1e-6));
    const Interval c = wilson_interval(10, 10);
    CHECK(c.upper == doctest::Approx(1.0));
    CHECK_THROWS_AS(wilson_interval(0, 0), ConfigError);
  }

  TEST_CASE("noise draws have the requested covariance") {
    Mat S(2, 2);
    S << 0.5, 0.2, 0.2, 0.3;
    const NoiseModel noise{S, 11};
    const auto d = draw_perturbations(noise, 20000, 0);
    Mat C = Mat::Zero(2, 2);
    Vec mean = Vec::Zero(2);
    for (const auto& v : d) mean += v;
    mean /= static_cast<double>(d.size());
    for (const auto& v : d) C += (v - mean) * (v - mean).transpose();
    C /= static_cast<double>(d.size() - 1);
    CHECK((C - S).norm() <= 0.1 * S.norm());
    CHECK(mean.norm() <= 0.05);
    // Same stream, same draws; other stream, other draws.
    CHECK(draw_perturbations(noise, 3, 4)[2] == draw_perturbations(noise, 3, 4)[2]);
    CHECK_FALSE(draw_perturbations(noise, 3, 4)[0] == draw_perturbations(noise, 3, 5)[0]);
  }

  TEST_CASE("noise validation") {
    CHECK_NOTHROW(validate_noise(NoiseModel::isotropic(3, 0.1, 1)));
    CHECK(NoiseModel::isotropic(3, 0.1, 1).is_isotropic());
    Mat asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(validate_noise(NoiseModel{asym, 1}), ConfigError);
    Mat indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(validate_noise(NoiseModel{indefinite, 1}), ConfigError);
    CHECK_THROWS_AS(validate_noise(NoiseModel{Mat::Zero(2, 2), 1}), ConfigError);
    CHECK(error_form_from_string("literal") == ErrorForm::literal);
    CHECK_THROWS_AS(error_form_from_string("other"), ConfigError);
  }

  TEST_CASE("a small study is deterministic and self-consistent") {
    Rng rng(71);
    const MaskingProblem p = quadratic_scenario(rng, 4, 2, 0.5);
    const NoiseModel noise = NoiseModel::isotropic(2, 0.01, 5);
    const NoiseStudy a = empirical_error_probability(p, noise, 30);
    const NoiseStudy b = empirical_error_probability(p, noise, 30);
    CHECK(a.n_valid + a.n_invalid == 30);
    CHECK(a.p_err == doctest::Approx(static_cast<double>(a.n_exceed) / a.n_valid));
    CHECK(a.wilson.lower <= a.p_err);
    CHECK(a.wilson.upper >= a.p_err);
    CHECK(a.bound >= 0.0);
    CHECK(a.bound <= 1.0);
    CHECK(a.bound_with_safety >= a.bound);
    CHECK_FALSE(a.bound_heuristic);
    CHECK(a.n_exceed == b.n_exceed);
    CHECK(a.bound == b.bound);
    for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].margin == b.trials[i].margin);
  }
}
