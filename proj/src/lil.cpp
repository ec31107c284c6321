#include "cllb/lil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cllb/error.hpp"
#include "cllb/philox.hpp"
#include "cllb/sampler.hpp"

namespace cllb {

TimeGrid Slab::grid() const {
  std::vector<double> p(unit_grid.points().begin(), unit_grid.points().end());
  for (double& x : p) x *= end;
  p.front() = start;
  p.back() = end;
  return TimeGrid(std::move(p));
}

namespace {

Slab make_slab(int n, double beta, std::size_t grid_points) {
  Slab s;
  s.n = n;
  s.start = t_seq(n + 1, beta);
  s.end = t_seq(n, beta);
  const double nd = static_cast<double>(n);
  const double log_width = std::pow(nd + 1.0, 1.0 + beta) - std::pow(nd, 1.0 + beta);
  s.unit_grid = TimeGrid::geometric(std::exp(-log_width), 1.0, grid_points);
  s.loglog_inv_end = loglog_inv_t_seq(n, beta);
  return s;
}

LocalizationPlan regrid(const LocalizationPlan& plan, std::size_t grid_points) {
  LocalizationPlan out = plan;
  for (auto& s : out.slabs) s = make_slab(s.n, plan.beta, grid_points);
  return out;
}

constexpr std::uint32_t stream_un(std::size_t k) { return static_cast<std::uint32_t>(3 * k + 1); }
constexpr std::uint32_t stream_yn(std::size_t k) { return static_cast<std::uint32_t>(3 * k + 2); }
constexpr std::uint32_t stream_early(std::size_t k) { return static_cast<std::uint32_t>(3 * k + 3); }

// Lower-triangular square root of a PSD matrix that may be rank deficient:
// A = V diag(l) V^T = B B^T with B = V sqrt(l); B^T = Q R gives A = R^T R.
CholeskyFactor semidefinite_factor(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd bt = (es.eigenvectors() * root.asDiagonal()).transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(bt);
  CholeskyFactor f;
  f.lower = qr.matrixQR().triangularView<Eigen::Upper>().transpose();
  return f;
}

}  // namespace

LocalizationPlan build_plan(const ModelParams& params, int n_min, int n_max,
                            std::size_t grid_points) {
  validate(params);
  if (n_min < 1) throw ValidationError("build_plan: n_min must be >= 1");
  if (!(n_min < n_max)) throw ValidationError("build_plan: need n_min < n_max");
  if (grid_points < 128) throw ValidationError("build_plan: slab grids need >= 128 points");
  LocalizationPlan plan;
  plan.beta = params.beta;
  plan.n_min = n_min;
  plan.requested_n_max = n_max;
  const int limit = t_seq_underflow_limit(params.beta);
  plan.n_max = std::min(n_max, limit);
  plan.clamped = plan.n_max < n_max;
  if (plan.n_max < n_min) {
    throw ValidationError("build_plan: empty feasible range (t_n underflows beyond n=" +
                          std::to_string(limit) + ")");
  }
  for (int n = n_min; n <= plan.n_max; ++n) plan.slabs.push_back(make_slab(n, params.beta, grid_points));
  return plan;
}

Blocks simulate_blocks(const LocalizationPlan& plan, const DerivedConstants& c, std::size_t count,
                       std::uint64_t seed, const BlockOptions& opts) {
  if (count == 0) throw ValidationError("simulate_blocks: count must be >= 1");
  Blocks out{plan, c, count, seed, opts.y_mode, {}};

  const CholeskyFactor early = factorize(build_cov_matrix(TimeGrid::uniform(1.0, opts.early_grid), c));

  for (std::size_t k = 0; k < plan.slabs.size(); ++k) {
    const Slab& slab = plan.slabs[k];
    const TimeGrid& grid = slab.unit_grid;
    const double tau0 = slab.unit_start();
    const auto m = static_cast<Eigen::Index>(grid.size());

    CholeskyFactor un_factor;
    CholeskyFactor yn_factor;
    Eigen::VectorXd yn_sd(m);
    try {
      un_factor = factorize(build_cov_matrix(grid, c, tau0));
      if (opts.y_mode == YMode::joint) {
        yn_factor = semidefinite_factor(build_yn_cov_matrix(grid, c, tau0).entries);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("slab n=" + std::to_string(slab.n) + ": " + e.what());
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      yn_sd(i) = std::sqrt(std::max(var_yn(grid[static_cast<std::size_t>(i)], tau0, c), 0.0));
    }

    SlabBlock blk;
    blk.n = slab.n;
    blk.mid_index = grid.size() / 2;
    blk.tau_mid = grid[blk.mid_index];
    blk.jitter_steps = un_factor.jitter_steps;
    blk.sup_un.resize(count);
    blk.sup_yn.resize(count);
    blk.sup_u.resize(count);
    blk.un_mid.resize(count);
    blk.yn_mid.resize(count);
    if (opts.keep_paths) {
      blk.un_paths.resize(static_cast<Eigen::Index>(count), m);
      blk.yn_paths.resize(static_cast<Eigen::Index>(count), m);
    }
    const auto mid = static_cast<Eigen::Index>(blk.mid_index);

    for_each_block(un_factor, count, seed, {stream_un(k), opts.workers},
                   [&](std::size_t first, const Eigen::MatrixXd& un) {
                     const Eigen::Index width = un.cols();
                     Eigen::MatrixXd z(m, width);
                     for (Eigen::Index j = 0; j < width; ++j) {
                       NormalStream normal(seed, stream_yn(k), first + static_cast<std::size_t>(j));
                       for (Eigen::Index i = 0; i < m; ++i) z(i, j) = normal();
                     }
                     Eigen::MatrixXd yn(m, width);
                     if (opts.y_mode == YMode::joint) {
                       yn.noalias() = yn_factor.lower.triangularView<Eigen::Lower>() * z;
                     } else {
                       yn = yn_sd.asDiagonal() * z;
                     }
                     for (Eigen::Index j = 0; j < width; ++j) {
                       const std::size_t p = first + static_cast<std::size_t>(j);
                       blk.sup_un[p] = un.col(j).cwiseAbs().maxCoeff();
                       blk.sup_yn[p] = yn.col(j).cwiseAbs().maxCoeff();
                       blk.sup_u[p] = (un.col(j) + yn.col(j)).cwiseAbs().maxCoeff();
                       blk.un_mid[p] = un(mid, j);
                       blk.yn_mid[p] = yn(mid, j);
                     }
                     if (opts.keep_paths) {
                       blk.un_paths.middleRows(static_cast<Eigen::Index>(first), width) = un.transpose();
                       blk.yn_paths.middleRows(static_cast<Eigen::Index>(first), width) = yn.transpose();
                     }
                   });

    // sup over [0, t_{n+1}] equals (t_{n+1}/t_n)^theta times sup over [0, 1] in law.
    blk.sup_early = sample_max_abs(early, count, seed, {stream_early(k), opts.workers});
    const double early_scale = std::pow(tau0, c.theta);
    for (double& v : blk.sup_early) v *= early_scale;
    out.slabs.push_back(std::move(blk));
  }
  return out;
}

LilStatistics compute_statistics(const Blocks& blocks, const DerivedConstants& c,
                                 const LambdaEstimate& lambda_hat) {
  LilStatistics st;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < blocks.slabs.size(); ++k) {
    if (blocks.plan.slabs[k].loglog_inv_end > 0.0) {
      used.push_back(k);
      st.ns.push_back(blocks.slabs[k].n);
    }
  }
  if (used.empty()) throw ValidationError("compute_statistics: no slab with t_n < 1/e");

  st.realizations.assign(blocks.count, {});
  st.mean_sup_yn_over_psi.assign(used.size(), 0.0);
  std::vector<double> last_un(blocks.count), last_u(blocks.count);
  for (std::size_t p = 0; p < blocks.count; ++p) {
    auto& recs = st.realizations[p];
    recs.reserve(used.size());
    double min_un = std::numeric_limits<double>::infinity();
    double min_u = min_un;
    for (std::size_t q = 0; q < used.size(); ++q) {
      const std::size_t k = used[q];
      const SlabBlock& b = blocks.slabs[k];
      // sup/psi(t_n) = (sup in unit time) * (log log 1/t_n)^theta.
      const double factor = std::pow(blocks.plan.slabs[k].loglog_inv_end, c.theta);
      LilRecord r;
      r.n = b.n;
      r.sup_u_over_psi = b.sup_u[p] * factor;
      r.sup_un_over_psi = b.sup_un[p] * factor;
      r.sup_yn_over_psi = b.sup_yn[p] * factor;
      if (!(b.sup_u[p] <= b.sup_un[p] + b.sup_yn[p])) ++st.triangle_violations;
      min_un = std::min(min_un, r.sup_un_over_psi);
      min_u = std::min(min_u, r.sup_u_over_psi);
      r.running_min_un = min_un;
      r.running_min_u = min_u;
      if (!recs.empty() && (r.running_min_un > recs.back().running_min_un ||
                            r.running_min_u > recs.back().running_min_u)) {
        ++st.monotonicity_violations;
      }
      st.mean_sup_yn_over_psi[q] += r.sup_yn_over_psi / static_cast<double>(blocks.count);
      recs.push_back(r);
    }
    last_un[p] = min_un;
    last_u[p] = min_u;
  }
  st.median_running_min_un = stats::median(last_un);
  st.median_running_min_u = stats::median(last_u);
  st.predicted = c.kappa * std::pow(lambda_hat.value, c.theta);
  st.predicted_stderr = c.kappa * c.theta * std::pow(lambda_hat.value, c.theta - 1.0) * lambda_hat.stderr;
  return st;
}

LemmaReport check_lemma_bounds(const Blocks& blocks, const DerivedConstants& c, double delta,
                               double gamma, const LambdaEstimate& lambda_hat) {
  if (!(delta > 0.0) || !(gamma > 0.0)) throw ValidationError("check_lemma_bounds: delta, gamma must be > 0");
  LemmaReport rep;
  rep.delta = delta;
  rep.gamma = gamma;
  const double beta = blocks.plan.beta;
  rep.predicted_slope = -lambda_hat.value * std::pow(c.kappa / gamma, 1.0 / c.theta) * (1.0 + beta);
  const double n_real = static_cast<double>(blocks.count);
  double partial = 0.0;
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < blocks.slabs.size(); ++k) {
    const Slab& slab = blocks.plan.slabs[k];
    if (!(slab.loglog_inv_end > 0.0)) continue;
    const SlabBlock& b = blocks.slabs[k];
    const double factor = std::pow(slab.loglog_inv_end, c.theta);
    LemmaRow row;
    row.n = b.n;
    std::size_t early = 0, yn = 0, small = 0;
    for (std::size_t p = 0; p < blocks.count; ++p) {
      if (b.sup_early[p] * factor >= delta) ++early;
      if (b.sup_yn[p] * factor >= delta) ++yn;
      if (b.sup_un[p] * factor <= gamma) ++small;
    }
    row.freq_early_exceed = static_cast<double>(early) / n_real;
    row.freq_yn_exceed = static_cast<double>(yn) / n_real;
    row.hits = small;
    row.p_small_ball = static_cast<double>(small) / n_real;
    row.p_small_ball_stderr = std::sqrt(row.p_small_ball * (1.0 - row.p_small_ball) / n_real);
    // (t_n/t_{n+1})^(2 theta) = exp(2 theta log_width); large exponents just send the shape to 0.
    const double log_width = -std::log(slab.unit_start());
    const double expo = delta * delta / (8.0 * c.c21 * std::pow(slab.loglog_inv_end, 2.0 * c.theta)) *
                        std::exp(std::min(2.0 * c.theta * log_width, 700.0));
    row.borell_shape = 2.0 * std::exp(-expo);
    partial += row.p_small_ball;
    row.partial_sum = partial;
    if (small > 0 && small < blocks.count && b.n >= 2) {
      xs.push_back(std::log(static_cast<double>(b.n)));
      ys.push_back(std::log(row.p_small_ball));
      ws.push_back(n_real * row.p_small_ball / (1.0 - row.p_small_ball));
    }
    rep.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    rep.slope_fit = stats::weighted_line_fit(xs, ys, ws);
    rep.slope_available = true;
  }
  return rep;
}

RefinementGap refinement_gap(const LocalizationPlan& plan, const DerivedConstants& c,
                             std::size_t count, std::uint64_t seed, unsigned workers) {
  RefinementGap out;
  if (plan.slabs.empty()) return out;
  const std::size_t m = plan.slabs.front().unit_grid.size();
  BlockOptions opts;
  opts.workers = workers;
  const Blocks coarse = simulate_blocks(plan, c, count, seed, opts);
  const Blocks fine = simulate_blocks(regrid(plan, 2 * m), c, count, seed + 1, opts);
  std::vector<double> all_a, all_b;
  for (std::size_t k = 0; k < coarse.slabs.size(); ++k) {
    const auto& a = coarse.slabs[k].sup_un;
    const auto& b = fine.slabs[k].sup_un;
    out.per_slab.push_back((stats::mean(b) - stats::mean(a)) / stats::mean(b));
    all_a.insert(all_a.end(), a.begin(), a.end());
    all_b.insert(all_b.end(), b.begin(), b.end());
  }
  // Delta method on the ratio a/b; slabs are close to independent in unit time.
  auto mean_se = [](const std::vector<double>& v) {
    const double mu = stats::mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::pair{mu, std::sqrt(ss / (v.size() - 1) / v.size())};
  };
  const auto [ma, sa] = mean_se(all_a);
  const auto [mb, sb] = mean_se(all_b);
  out.pooled = (mb - ma) / mb;
  out.pooled_stderr = (ma / mb) * std::hypot(sa / ma, sb / mb);
  return out;
}

}  // namespace cllb
