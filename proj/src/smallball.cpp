#include "cllb/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cllb/error.hpp"
#include "cllb/sampler.hpp"
#include "cllb/stats.hpp"

namespace cllb {

std::string_view to_string(ProcessKind k) { return k == ProcessKind::sfhe ? "sfhe" : "fbm"; }

ProcessSpec ProcessSpec::sfhe(const DerivedConstants& c, double horizon) {
  ProcessSpec s;
  s.kind = ProcessKind::sfhe;
  s.consts = c;
  s.horizon = horizon;
  return s;
}

ProcessSpec ProcessSpec::fbm(double hurst_index, double horizon) {
  if (!(hurst_index > 0.0) || !(hurst_index < 1.0)) {
    throw ValidationError("fBm hurst index must lie in (0,1)");
  }
  ProcessSpec s;
  s.kind = ProcessKind::fbm;
  s.hurst_index = hurst_index;
  s.horizon = horizon;
  return s;
}

double ProcessSpec::scaling_index() const {
  return kind == ProcessKind::sfhe ? consts.theta : hurst_index;
}

CovMatrix process_cov_matrix(const ProcessSpec& spec, std::size_t grid_size) {
  const TimeGrid grid = TimeGrid::uniform(spec.horizon, grid_size);
  return spec.kind == ProcessKind::sfhe ? build_cov_matrix(grid, spec.consts)
                                        : build_fbm_cov_matrix(grid, spec.hurst_index);
}

std::vector<double> epsilon_schedule(double eps0, double ratio, int n) {
  if (!(eps0 > 0.0) || !(ratio > 0.0) || !(ratio < 1.0) || n < 1) {
    throw ValidationError("epsilon schedule needs eps0 > 0, 0 < ratio < 1, n >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = eps0 * std::pow(ratio, k);
  return out;
}

SmallBallCurve curve_from_maxima(std::span<const double> max_abs, std::span<const double> epsilons,
                                 std::size_t grid_size, ProcessKind process) {
  std::vector<double> sorted(max_abs.begin(), max_abs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  SmallBallCurve c;
  c.grid_size = grid_size;
  c.process = process;
  for (double eps : epsilons) {
    const auto hits = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), eps) - sorted.begin());
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    c.epsilons.push_back(eps);
    c.probabilities.push_back(p);
    c.stderrs.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
    c.hits.push_back(hits);
    c.counts.push_back(n);
  }
  return c;
}

double bridge_stay_probability(double x, double y, double dt, double eps) {
  if (!(std::abs(x) < eps) || !(std::abs(y) < eps)) return 0.0;
  // Method of images for Brownian motion killed outside (0, w), divided by the free
  // transition density.
  const double w = 2.0 * eps;
  const double a = x + eps;
  const double b = y + eps;
  const double d = b - a;
  auto term = [&](int k) {
    const double kw = 2.0 * k * w;
    const double e1 = ((d + kw) * (d + kw) - d * d) / (2.0 * dt);
    const double e2 = ((a + b + kw) * (a + b + kw) - d * d) / (2.0 * dt);
    return std::pair{e1, e2};
  };
  auto ex = [](double e) { return e < 745.0 ? std::exp(-e) : 0.0; };
  auto [e1, e2] = term(0);
  double q = ex(e1) - ex(e2);
  // Images come in pairs +-k; stop once a whole pair is far below double resolution.
  for (int k = 1; k < 10000; ++k) {
    const auto [p1, p2] = term(k);
    const auto [m1, m2] = term(-k);
    q += ex(p1) + ex(m1) - ex(p2) - ex(m2);
    if (std::min({p1, p2, m1, m2}) > 60.0) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

std::vector<double> auto_epsilons(std::span<const double> max_abs, std::size_t points, double upper,
                                  std::size_t min_hits) {
  if (points < 2) throw ValidationError("auto_epsilons: need at least 2 radii");
  if (max_abs.size() < min_hits * 2) throw ValidationError("auto_epsilons: ensemble too small");
  std::vector<double> sorted(max_abs.begin(), max_abs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const double hi = sorted[static_cast<std::size_t>(std::floor(upper * (n - 1)))];
  const double lo = sorted[min_hits - 1];
  if (!(hi > lo)) throw NumericalError("auto_epsilons: degenerate quantile range");
  std::vector<double> eps(points);
  for (std::size_t k = 0; k < points; ++k) {
    eps[k] = hi * std::pow(lo / hi, static_cast<double>(k) / static_cast<double>(points - 1));
  }
  eps.back() = lo;
  return eps;
}

SmallBallCurve estimate_curve(const ProcessSpec& spec, std::span<const double> epsilons,
                              const CurveOptions& opts) {
  if (epsilons.empty()) throw ValidationError("estimate_curve: no radii given");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ValidationError("estimate_curve: radii must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw ValidationError("estimate_curve: radii must be strictly decreasing");
    }
    if (epsilons[i] < 0.2 && opts.grid_size < 256) {
      throw ValidationError("estimate_curve: grid_size >= 256 required for radii below 0.2");
    }
  }
  if (opts.count < 10000) throw ValidationError("estimate_curve: count must be >= 1e4");
  if (opts.grid_size < 1) throw ValidationError("estimate_curve: grid_size must be >= 1");
  const bool bridge = opts.estimator == SupEstimator::brownian_bridge;
  if (bridge && !(spec.kind == ProcessKind::fbm && spec.hurst_index == 0.5)) {
    throw ValidationError("estimate_curve: the Brownian-bridge estimator requires fBm with h = 0.5");
  }

  const CovMatrix cov = process_cov_matrix(spec, opts.grid_size);
  const CholeskyFactor factor = factorize(cov);
  const std::size_t ne = epsilons.size();
  std::vector<double> maxima(opts.count);
  // Per-path bridge weights, row-major (path, radius); only filled for paths inside the largest ball.
  std::vector<double> weights(bridge ? opts.count * ne : 0, 0.0);
  const double dt = spec.horizon / static_cast<double>(opts.grid_size);

  for_each_block(factor, opts.count, opts.seed, {0, opts.workers},
                 [&](std::size_t first, const Eigen::MatrixXd& x) {
                   for (Eigen::Index j = 0; j < x.cols(); ++j) {
                     const std::size_t p = first + static_cast<std::size_t>(j);
                     const double mx = x.col(j).cwiseAbs().maxCoeff();
                     maxima[p] = mx;
                     if (!bridge) continue;
                     for (std::size_t e = 0; e < ne && mx <= epsilons[e]; ++e) {
                       double logw = 0.0;
                       double prev = 0.0;
                       for (Eigen::Index i = 0; i < x.rows() && logw > -745.0; ++i) {
                         const double q = bridge_stay_probability(prev, x(i, j), dt, epsilons[e]);
                         logw += q > 0.0 ? std::log(q) : -INFINITY;
                         prev = x(i, j);
                       }
                       weights[p * ne + e] = std::exp(logw);
                     }
                   }
                 });

  SmallBallCurve curve = curve_from_maxima(maxima, epsilons, opts.grid_size, spec.kind);
  if (bridge) {
    curve.estimator = SupEstimator::brownian_bridge;
    const auto n = static_cast<double>(opts.count);
    for (std::size_t e = 0; e < ne; ++e) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t p = 0; p < opts.count; ++p) {
        const double w = weights[p * ne + e];
        sum += w;
        sum_sq += w * w;
      }
      const double mean = sum / n;
      curve.probabilities[e] = mean;
      curve.stderrs[e] = std::sqrt(std::max(sum_sq / n - mean * mean, 0.0) / (n - 1.0));
    }
  }
  if (std::all_of(curve.hits.begin(), curve.hits.end(), [](std::size_t h) { return h == 0; })) {
    throw NumericalError("estimate_curve: no path fell inside any ball; increase the radii or the count");
  }
  return curve;
}

SmallBallFit fit_rate(const SmallBallCurve& curve, double theta, const FitOptions& opts) {
  if (!(theta > 0.0) || !(theta < 1.0)) throw ValidationError("fit_rate: theta must lie in (0,1)");
  std::vector<double> eps, y, var_y;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double p = curve.probabilities[i];
    if (curve.hits[i] < std::max<std::size_t>(opts.min_hits, 1) || !(p > 0.0) || !(p < 1.0) ||
        !(curve.stderrs[i] > 0.0)) {
      continue;
    }
    const double se = curve.stderrs[i];
    eps.push_back(curve.epsilons[i]);
    y.push_back(-std::log(p));
    var_y.push_back(se * se / (p * p));
  }
  if (eps.size() < 4) {
    throw NumericalError("fit_rate: " + std::to_string(eps.size()) +
                         " usable curve points, at least 4 required");
  }

  SmallBallFit fit;
  fit.points_used = eps.size();

  std::vector<double> x_const(eps.size()), w_const(eps.size());
  std::vector<double> x_log(eps.size()), y_log(eps.size()), w_log(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    x_const[i] = std::pow(eps[i], -1.0 / theta);
    w_const[i] = 1.0 / var_y[i];
    x_log[i] = -std::log(eps[i]);
    y_log[i] = std::log(y[i]);
    w_log[i] = y[i] * y[i] / var_y[i];
  }
  const auto through_origin = stats::weighted_origin_fit(x_const, y, w_const);
  fit.constant = through_origin.slope;
  fit.stderr_constant = through_origin.se_slope;
  const auto line = stats::weighted_line_fit(x_log, y_log, w_log);
  fit.exponent = line.slope;
  fit.stderr_exponent = line.se_slope;

  // Radii are ordered largest first, so -log P should grow along the curve.
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (eps[i] < eps[i - 1] && y[i] < y[i - 1] - 2.0 * std::sqrt(var_y[i] + var_y[i - 1])) {
      std::ostringstream os;
      os << "-log P decreases beyond noise between eps=" << eps[i - 1] << " and eps=" << eps[i];
      fit.warnings.push_back(os.str());
    }
  }
  return fit;
}

ResolutionCheck compare_resolutions(const SmallBallCurve& coarse, const SmallBallCurve& fine,
                                    double z_limit) {
  if (coarse.size() != fine.size()) throw ValidationError("compare_resolutions: radii differ");
  ResolutionCheck r;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    if (coarse.epsilons[i] != fine.epsilons[i]) throw ValidationError("compare_resolutions: radii differ");
    const double se = std::hypot(coarse.stderrs[i], fine.stderrs[i]);
    const double gap = coarse.probabilities[i] - fine.probabilities[i];
    const double z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap));
    r.z.push_back(z);
    r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
  }
  r.consistent = r.max_abs_z < z_limit;
  return r;
}

LambdaEstimate lambda_from_fit(const SmallBallFit& fit, const DerivedConstants& c) {
  const double scale = std::pow(c.kappa, 1.0 / c.theta);
  return {fit.constant / scale, fit.stderr_constant / scale};
}

}  // namespace cllb
