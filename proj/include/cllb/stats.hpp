#pragma once

#include <span>
#include <vector>

namespace cllb::stats {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Complementary Kolmogorov distribution Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and Stephens' small-sample
/// correction on the effective size n m / (n + m).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> y);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
};

/// Weighted least squares y ~ a + b x with weights w = 1/var(y); standard errors assume
/// the weights are exact inverse variances.
LineFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w);

struct ProportionalFit {
  double slope = 0.0;
  double se_slope = 0.0;
};

/// Weighted least squares y ~ b x through the origin.
ProportionalFit weighted_origin_fit(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> w);

/// Median (mean of the two middle values for even sizes).
double median(std::vector<double> v);

double mean(std::span<const double> v);

}  // namespace cllb::stats
