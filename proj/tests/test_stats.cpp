#include <doctest.h>

#include <cmath>
#include <vector>

#include "cllb/philox.hpp"
#include "cllb/stats.hpp"

using namespace cllb::stats;

TEST_CASE("kolmogorov distribution") {
  // tabulated critical values
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_q(0.2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kolmogorov_q(0.4) == doctest::Approx(0.9972).epsilon(1e-3));
}

TEST_CASE("ks two-sample") {
  std::vector<double> a, b, c;
  cllb::NormalStream g(1, 0, 0), h(2, 0, 0);
  for (int i = 0; i < 3000; ++i) {
    a.push_back(g());
    const double x = h();
    b.push_back(x);
    c.push_back(x + 0.3);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
  const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(ks_two_sample(x, y).statistic == 1.0);
}

TEST_CASE("weighted fits recover exact lines") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y, w(5, 1.0);
  for (double v : x) y.push_back(0.5 - 2.0 * v);
  const auto f = weighted_line_fit(x, y, w);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(0.5).epsilon(1e-14));
  const auto o = weighted_origin_fit(x, x, w);
  CHECK(o.slope == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("median and mean") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  const std::vector<double> v{1, 2, 6};
  CHECK(mean(v) == 3.0);
}
