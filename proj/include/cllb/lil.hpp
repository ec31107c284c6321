#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cllb/covariance.hpp"
#include "cllb/params.hpp"
#include "cllb/smallball.hpp"
#include "cllb/stats.hpp"

namespace cllb {

/// One localization slab [t_{n+1}, t_n].
///
/// Sampling happens in time measured in units of t_n: u_n on the slab has the law of
/// t_n^theta times the slab field on [t_{n+1}/t_n, 1] (the covariance is homogeneous of
/// degree 2 theta in (s, t, slab_start)). The unit grid therefore never underflows even
/// when t_{n+1} is subnormal.
struct Slab {
  int n = 0;
  /// t_{n+1}; may be subnormal near the underflow limit.
  double start = 0.0;
  /// t_n.
  double end = 0.0;
  /// Geometric grid on [t_{n+1}/t_n, 1].
  TimeGrid unit_grid{std::vector<double>{1.0}};
  /// (1 + beta) log n, i.e. log log(1/t_n).
  double loglog_inv_end = 0.0;

  /// Grid in natural time; first point is exactly t_{n+1}, last exactly t_n.
  TimeGrid grid() const;
  double unit_start() const { return unit_grid.front(); }
};

struct LocalizationPlan {
  double beta = 1.0;
  int n_min = 1;
  int n_max = 1;
  int requested_n_max = 1;
  /// True when n_max was lowered to keep t_{n_max} > 1e-300.
  bool clamped = false;
  std::vector<Slab> slabs;
};

/// Slabs n_min..n_max with grid_points geometric points each. Throws ValidationError if
/// grid_points < 128, n_min < 1 or the feasible range is empty.
LocalizationPlan build_plan(const ModelParams& params, int n_min, int n_max,
                            std::size_t grid_points = 1024);

enum class YMode {
  /// Y_n independent across grid points with the exact marginal variance.
  marginal,
  /// Y_n jointly Gaussian with its full covariance on the slab.
  joint,
};

struct BlockOptions {
  YMode y_mode = YMode::marginal;
  unsigned workers = 0;
  bool keep_paths = false;
  /// Uniform grid for sup over [0, t_{n+1}] (sampled by self-similarity from [0, 1]).
  std::size_t early_grid = 256;
};

/// Per-slab samples. All values are in unit time, i.e. divided by t_n^theta.
struct SlabBlock {
  int n = 0;
  std::size_t mid_index = 0;
  double tau_mid = 0.0;
  int jitter_steps = 0;
  std::vector<double> sup_un;
  std::vector<double> sup_yn;
  /// sup of |u_n + Y_n| over the grid.
  std::vector<double> sup_u;
  /// sup of |u| over [0, t_{n+1}].
  std::vector<double> sup_early;
  std::vector<double> un_mid;
  std::vector<double> yn_mid;
  /// count x grid-size, only with keep_paths.
  Eigen::MatrixXd un_paths;
  Eigen::MatrixXd yn_paths;
};

struct Blocks {
  LocalizationPlan plan;
  DerivedConstants consts;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  YMode y_mode = YMode::marginal;
  std::vector<SlabBlock> slabs;
};

/// Samples count independent realizations of every slab field u_n (independent across n)
/// together with Y_n. Throws NumericalError naming the slab if a factorization fails.
Blocks simulate_blocks(const LocalizationPlan& plan, const DerivedConstants& c, std::size_t count,
                       std::uint64_t seed, const BlockOptions& opts = {});

struct LilRecord {
  int n = 0;
  double sup_u_over_psi = 0.0;
  double sup_un_over_psi = 0.0;
  double sup_yn_over_psi = 0.0;
  double running_min_un = 0.0;
  double running_min_u = 0.0;
};

struct LilStatistics {
  /// [realization][slab], restricted to slabs with t_n < 1/e.
  std::vector<std::vector<LilRecord>> realizations;
  /// kappa * lambda^theta and its delta-method standard error.
  double predicted = 0.0;
  double predicted_stderr = 0.0;
  double median_running_min_un = 0.0;
  double median_running_min_u = 0.0;
  std::size_t monotonicity_violations = 0;
  std::size_t triangle_violations = 0;
  /// Mean of sup|Y_n|/psi(t_n) across realizations, per slab.
  std::vector<double> mean_sup_yn_over_psi;
  std::vector<int> ns;
};

LilStatistics compute_statistics(const Blocks& blocks, const DerivedConstants& c,
                                 const LambdaEstimate& lambda_hat);

struct LemmaRow {
  int n = 0;
  /// Fraction with sup_{[0,t_{n+1}]}|u| >= delta psi(t_n).
  double freq_early_exceed = 0.0;
  /// Fraction with sup_{slab}|Y_n| >= delta psi(t_n).
  double freq_yn_exceed = 0.0;
  /// 2 exp(-delta^2 (t_n/t_{n+1})^(2 theta) / (8 c21 (log log 1/t_n)^(2 theta))), the
  /// Borell-type tail shape; meaningful once E sup <= delta psi(t_n) / 2.
  double borell_shape = 0.0;
  /// Fraction with sup_{slab}|u_n| <= gamma psi(t_n).
  double p_small_ball = 0.0;
  double p_small_ball_stderr = 0.0;
  std::size_t hits = 0;
  /// Running sum of p_small_ball.
  double partial_sum = 0.0;
};

struct LemmaReport {
  double delta = 0.0;
  double gamma = 0.0;
  std::vector<LemmaRow> rows;
  /// -lambda (kappa/gamma)^(1/theta) (1 + beta).
  double predicted_slope = 0.0;
  /// Weighted fit of log p_small_ball against log n over rows with hits.
  stats::LineFit slope_fit{};
  bool slope_available = false;
};

LemmaReport check_lemma_bounds(const Blocks& blocks, const DerivedConstants& c, double delta,
                               double gamma, const LambdaEstimate& lambda_hat);

struct RefinementGap {
  /// (fine - coarse) / fine for the mean of sup|u_n|, per slab.
  std::vector<double> per_slab;
  /// Same, pooled over all slabs, with its Monte Carlo standard error.
  double pooled = 0.0;
  double pooled_stderr = 0.0;
};

/// Doubles the slab grid and compares mean sup|u_n| against an independent ensemble.
RefinementGap refinement_gap(const LocalizationPlan& plan, const DerivedConstants& c,
                             std::size_t count, std::uint64_t seed, unsigned workers);

}  // namespace cllb
