#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "cllb/covariance.hpp"

namespace cllb {

/// Lower-triangular L with L L^T = C (+ recorded jitter on the diagonal).
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  /// Number of jitter escalations taken (0 when the plain factorization succeeded).
  int jitter_steps = 0;
  /// Diagonal shift finally applied.
  double jitter = 0.0;
  /// Rows that are identically zero in C (deterministic coordinates such as u_n at the slab start).
  std::size_t degenerate_rows = 0;

  bool jittered() const { return jitter_steps > 0; }
  Eigen::Index size() const { return lower.rows(); }
};

/// Cholesky factorization with the jitter policy: plain first, then 1e-12 * max diagonal,
/// doubled up to three times. Throws NumericalError with a condition estimate if all fail.
CholeskyFactor factorize(const Eigen::MatrixXd& cov);
CholeskyFactor factorize(const CovMatrix& cov);

struct PathEnsemble {
  TimeGrid grid;
  /// count x grid-size; row p is path p.
  Eigen::MatrixXd paths;
  std::uint64_t seed = 0;
  Provenance cov_provenance = Provenance::closed_form;
  int jitter_steps = 0;
  double jitter = 0.0;

  std::size_t count() const { return static_cast<std::size_t>(paths.rows()); }
};

struct SampleOptions {
  /// Distinguishes independent uses of one seed (e.g. u_n vs Y_n of the same slab).
  std::uint32_t stream = 0;
  /// 0 = CLLB_WORKERS or hardware concurrency.
  unsigned workers = 0;
};

/// Paths are generated in fixed blocks of this many; a block is always computed the same
/// way regardless of which worker runs it.
inline constexpr std::size_t kSampleBlock = 256;

/// Calls visit(first_path, X) for every block, X being (grid-size x block) with one path per
/// column. Blocks may be visited concurrently; visit must only touch per-block state.
void for_each_block(const CholeskyFactor& factor, std::size_t count, std::uint64_t seed,
                    const SampleOptions& opts,
                    const std::function<void(std::size_t, const Eigen::MatrixXd&)>& visit);

PathEnsemble sample(const CovMatrix& cov, std::size_t count, std::uint64_t seed,
                    const SampleOptions& opts = {});
PathEnsemble sample(const CovMatrix& cov, const CholeskyFactor& factor, std::size_t count,
                    std::uint64_t seed, const SampleOptions& opts = {});

/// max_t |X(t)| per path without materializing the ensemble.
std::vector<double> sample_max_abs(const CholeskyFactor& factor, std::size_t count,
                                   std::uint64_t seed, const SampleOptions& opts = {});

struct FbmSpec {
  double hurst_index = 0.5;
  TimeGrid grid;
};

/// Exact fBm ensemble with covariance 0.5 (s^2h + t^2h - |t-s|^2h).
PathEnsemble sample_fbm(const FbmSpec& spec, std::size_t count, std::uint64_t seed,
                        const SampleOptions& opts = {});

}  // namespace cllb
