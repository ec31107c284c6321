#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cllb/covariance.hpp"
#include "cllb/params.hpp"

namespace cllb {

enum class ProcessKind { sfhe, fbm };

std::string_view to_string(ProcessKind k);

/// A self-similar Gaussian process observed on a uniform grid over (0, horizon].
struct ProcessSpec {
  ProcessKind kind = ProcessKind::sfhe;
  DerivedConstants consts{};
  double hurst_index = 0.5;
  double horizon = 1.0;

  static ProcessSpec sfhe(const DerivedConstants& c, double horizon = 1.0);
  static ProcessSpec fbm(double hurst_index, double horizon = 1.0);

  /// theta for the solution, h for fBm.
  double scaling_index() const;
};

CovMatrix process_cov_matrix(const ProcessSpec& spec, std::size_t grid_size);

enum class SupEstimator {
  /// Indicator that the maximum over the grid stays inside the ball.
  grid_max,
  /// For Brownian motion only: the indicator times the probability that the Brownian
  /// bridges between grid points stay inside, an unbiased estimator of the
  /// continuous-time small-ball probability.
  brownian_bridge,
};

struct SmallBallCurve {
  std::vector<double> epsilons;
  std::vector<double> probabilities;
  /// Monte Carlo standard error; sqrt(p (1-p) / count) for the grid-max estimator.
  std::vector<double> stderrs;
  /// Paths whose grid maximum lies inside the ball.
  std::vector<std::size_t> hits;
  std::vector<std::size_t> counts;
  std::size_t grid_size = 0;
  ProcessKind process = ProcessKind::sfhe;
  SupEstimator estimator = SupEstimator::grid_max;

  std::size_t size() const { return epsilons.size(); }
  bool zero_hit(std::size_t i) const { return hits[i] == 0; }
};


struct CurveOptions {
  std::size_t count = 100000;
  std::size_t grid_size = 1024;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  SupEstimator estimator = SupEstimator::grid_max;
};

/// eps0 * ratio^k for k = 0..n-1.
std::vector<double> epsilon_schedule(double eps0 = 0.5, double ratio = 0.75, int n = 8);

/// Fraction of paths with max over the grid of |X| <= eps, for each eps. All radii share one
/// ensemble. Throws ValidationError on bad inputs and NumericalError when no radius is hit.
SmallBallCurve estimate_curve(const ProcessSpec& spec, std::span<const double> epsilons,
                              const CurveOptions& opts);

/// Radii spaced geometrically from the empirical (1 - upper)-quantile of the maxima down to the
/// smallest radius that still holds min_hits paths.
std::vector<double> auto_epsilons(std::span<const double> max_abs, std::size_t points,
                                  double upper = 0.1, std::size_t min_hits = 20);

/// Exact probability that a Brownian bridge from x to y over time dt stays in (-eps, eps).
double bridge_stay_probability(double x, double y, double dt, double eps);

/// Curve from precomputed per-path maxima.
SmallBallCurve curve_from_maxima(std::span<const double> max_abs, std::span<const double> epsilons,
                                 std::size_t grid_size, ProcessKind process);

struct SmallBallFit {
  /// Power of 1/eps in -log P from a free log-log fit.
  double exponent = 0.0;
  /// c in -log P ~ c eps^(-1/theta), fitted through the origin.
  double constant = 0.0;
  double stderr_exponent = 0.0;
  double stderr_constant = 0.0;
  std::size_t points_used = 0;
  std::vector<std::string> warnings;
};

struct FitOptions {
  /// Points with fewer hits are excluded from the fit.
  std::size_t min_hits = 20;
};

/// Inverse-variance weighted fits of -log P: through the origin against eps^(-1/theta)
/// for the constant, and log(-log P) against log(1/eps) for the exponent. Weights come from
/// the delta method, Var log P ~ (stderr/P)^2, which is (1-P)/(n P) for the grid-max estimator. Needs at least four usable points.
SmallBallFit fit_rate(const SmallBallCurve& curve, double theta, const FitOptions& opts = {});

struct ResolutionCheck {
  /// (P_coarse - P_fine) / combined standard error, per radius.
  std::vector<double> z;
  double max_abs_z = 0.0;
  bool consistent = true;
};

/// Compares two curves over the same radii estimated on different grid resolutions.
ResolutionCheck compare_resolutions(const SmallBallCurve& coarse, const SmallBallCurve& fine,
                                    double z_limit = 2.0);

struct LambdaEstimate {
  double value = 0.0;
  double stderr = 0.0;
};

/// lambda = constant / kappa^(1/theta) for the solution's curve.
LambdaEstimate lambda_from_fit(const SmallBallFit& fit, const DerivedConstants& c);

}  // namespace cllb
