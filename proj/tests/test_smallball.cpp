#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cllb/error.hpp"
#include "cllb/smallball.hpp"
#include "oracles.hpp"

using namespace cllb;

TEST_CASE("reflection series oracle") {
  CHECK(oracle::bm_small_ball(0.5) == doctest::Approx(9.16e-3).epsilon(1e-3));
  CHECK(oracle::bm_small_ball(5.0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("epsilon schedule") {
  const auto e = epsilon_schedule();
  REQUIRE(e.size() == 8);
  CHECK(e[0] == 0.5);
  CHECK(e[7] == doctest::Approx(0.5 * std::pow(0.75, 7)));
}

TEST_CASE("bridge stay probability") {
  // two-sided barrier for the standard bridge: 1 + 2 sum (-1)^k exp(-2 k^2 eps^2)
  for (double eps : {0.4, 0.8, 1.5}) {
    double ref = 1.0;
    for (int k = 1; k < 50; ++k) ref += 2.0 * ((k % 2) ? -1.0 : 1.0) * std::exp(-2.0 * k * k * eps * eps);
    CHECK(bridge_stay_probability(0.0, 0.0, 1.0, eps) == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(bridge_stay_probability(0.1, 0.2, 1e-6, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bridge_stay_probability(1.1, 0.2, 0.1, 1.0) == 0.0);
  // scale invariance: B on [0, dt] with barrier eps equals B on [0, 1] with eps / sqrt(dt)
  CHECK(bridge_stay_probability(0.01, -0.02, 0.04, 0.1) ==
        doctest::Approx(bridge_stay_probability(0.05, -0.1, 1.0, 0.5)).epsilon(1e-12));
}

TEST_CASE("fit recovers a noiseless curve") {
  const double theta = 0.25, c = 1.7;
  SmallBallCurve curve;
  curve.grid_size = 1024;
  for (int i = 0; i < 8; ++i) {
    const double eps = 1.2 * std::pow(0.93, i);
    const double p = std::exp(-c * std::pow(eps, -1.0 / theta));
    curve.epsilons.push_back(eps);
    curve.probabilities.push_back(p);
    curve.stderrs.push_back(0.01 * p);
    curve.hits.push_back(1000000);
    curve.counts.push_back(1000000000);
  }
  const auto fit = fit_rate(curve, theta);
  CHECK(fit.exponent == doctest::Approx(1.0 / theta).epsilon(1e-8));
  CHECK(fit.constant == doctest::Approx(c).epsilon(1e-8));
  CHECK(fit.points_used == 8);
  CHECK(fit.warnings.empty());
  curve.hits[5] = 3;
  curve.hits[6] = 3;
  curve.hits[7] = 3;
  curve.hits[4] = 3;
  curve.hits[3] = 3;
  CHECK_THROWS_AS(fit_rate(curve, theta), NumericalError);
}

TEST_CASE("huge ball") {
  const auto spec = ProcessSpec::sfhe(derive({2.0, 0.5, 1.0}));
  const double eps = 10.0 * std::sqrt(spec.consts.c21);
  const std::vector<double> radii{eps};
  const auto curve = estimate_curve(spec, radii, {10000, 256, 3, 0});
  CHECK(curve.probabilities[0] == 1.0);
}

TEST_CASE("curve validation") {
  const auto spec = ProcessSpec::fbm(0.5);
  const std::vector<double> up{0.2, 0.3}, neg{0.3, -0.1}, tiny{0.1};
  CHECK_THROWS_AS(estimate_curve(spec, up, {10000, 256, 1, 0}), ValidationError);
  CHECK_THROWS_AS(estimate_curve(spec, neg, {10000, 256, 1, 0}), ValidationError);
  CHECK_THROWS_AS(estimate_curve(spec, tiny, {10000, 128, 1, 0}), ValidationError);
  CHECK_THROWS_AS(estimate_curve(spec, tiny, {100, 256, 1, 0}), ValidationError);
  const std::vector<double> hopeless{0.05};
  CHECK_THROWS_AS(estimate_curve(spec, hopeless, {10000, 256, 1, 0}), NumericalError);
  CurveOptions bridge{10000, 256, 1, 0, SupEstimator::brownian_bridge};
  CHECK_THROWS_AS(estimate_curve(ProcessSpec::fbm(0.7), up, bridge), ValidationError);
}

TEST_CASE("estimates are deterministic") {
  const auto spec = ProcessSpec::fbm(0.5);
  const std::vector<double> radii{1.0, 0.8};
  const auto a = estimate_curve(spec, radii, {20000, 256, 7, 1});
  const auto b = estimate_curve(spec, radii, {20000, 256, 7, 2});
  CHECK(a.probabilities == b.probabilities);
}

TEST_CASE("bridge estimator is unbiased on a coarse grid") {
  // grid max at 64 points overestimates P, the bridge correction does not
  const auto spec = ProcessSpec::fbm(0.5);
  const std::vector<double> radii{1.0, 0.7};
  const auto grid = estimate_curve(spec, radii, {40000, 64, 5, 0});
  const auto bridge = estimate_curve(spec, radii, {40000, 64, 5, 0, SupEstimator::brownian_bridge});
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double p0 = oracle::bm_small_ball(radii[i]);
    const double se = std::sqrt(p0 * (1 - p0) / 40000);
    CHECK(std::abs(bridge.probabilities[i] - p0) < 3.5 * se);
    CHECK(grid.probabilities[i] - p0 > 3.5 * se);
  }
}

TEST_CASE("auto radii hold enough hits") {
  std::vector<double> maxima;
  for (int i = 1; i <= 10000; ++i) maxima.push_back(i / 10000.0);
  const auto eps = auto_epsilons(maxima, 8, 0.1, 20);
  REQUIRE(eps.size() == 8);
  CHECK(eps.front() == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(eps.back() >= 0.002 - 1e-12);
  for (std::size_t i = 1; i < eps.size(); ++i) CHECK(eps[i] < eps[i - 1]);
}

TEST_CASE("resolution comparison") {
  SmallBallCurve a, b;
  a.epsilons = b.epsilons = {1.0};
  a.probabilities = {0.5};
  b.probabilities = {0.4};
  a.stderrs = b.stderrs = {0.01};
  a.hits = b.hits = {100};
  a.counts = b.counts = {1000};
  const auto r = compare_resolutions(a, b);
  CHECK_FALSE(r.consistent);
  CHECK(r.max_abs_z == doctest::Approx(0.1 / std::sqrt(2e-4)));
}
