#include "cllb/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cllb/error.hpp"
#include "cllb/parallel.hpp"
#include "cllb/philox.hpp"

namespace cllb {

namespace {

// A pivot whose square is below this fraction of its own diagonal entry is
// indistinguishable from rounding: the matrix is treated as singular.
constexpr double kSingularPivot = 1e-13;
constexpr double kJitterBase = 1e-12;
constexpr int kMaxJitterSteps = 3;

bool row_is_zero(const Eigen::MatrixXd& a, Eigen::Index i) {
  return a.row(i).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

CholeskyFactor factorize(const Eigen::MatrixXd& cov) {
  const Eigen::Index m = cov.rows();
  if (m == 0 || cov.cols() != m) throw ValidationError("factorize: matrix must be square and non-empty");

  std::vector<Eigen::Index> active;
  active.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!row_is_zero(cov, i)) active.push_back(i);
  }
  CholeskyFactor out;
  out.lower = Eigen::MatrixXd::Zero(m, m);
  out.degenerate_rows = static_cast<std::size_t>(m) - active.size();
  if (active.empty()) return out;

  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) sub(i, j) = cov(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]);
  }
  const double max_diag = sub.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) throw NumericalError("factorize: non-positive diagonal");

  double worst_pivot = 0.0;
  for (int step = 0; step <= kMaxJitterSteps; ++step) {
    const double jitter = step == 0 ? 0.0 : kJitterBase * max_diag * std::ldexp(1.0, step - 1);
    Eigen::MatrixXd shifted = sub;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    worst_pivot = 0.0;
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
      const Eigen::MatrixXd& l = llt.matrixLLT();
      worst_pivot = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < k; ++i) {
        worst_pivot = std::min(worst_pivot, l(i, i) * l(i, i) / shifted(i, i));
      }
      ok = std::isfinite(worst_pivot) && worst_pivot >= kSingularPivot;
    }
    if (!ok) continue;

    const Eigen::MatrixXd l = llt.matrixL();
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = j; i < k; ++i) {
        out.lower(active[static_cast<std::size_t>(i)], active[static_cast<std::size_t>(j)]) = l(i, j);
      }
    }
    out.jitter_steps = step;
    out.jitter = jitter;
    if (m <= 1024) {
      const double rel = (out.lower * out.lower.transpose() - cov).norm() / cov.norm();
      if (!(rel <= 1e-9)) {
        std::ostringstream os;
        os << "factorize: reconstruction error " << rel << " exceeds 1e-9";
        throw NumericalError(os.str());
      }
    }
    return out;
  }
  std::ostringstream os;
  os.precision(3);
  os << "factorize: matrix of size " << m << " still singular after " << kMaxJitterSteps
     << " jitter escalations (condition estimate >= "
     << (worst_pivot > 0.0 ? 1.0 / worst_pivot : std::numeric_limits<double>::infinity()) << ")";
  throw NumericalError(os.str());
}

CholeskyFactor factorize(const CovMatrix& cov) { return factorize(cov.entries); }

void for_each_block(const CholeskyFactor& factor, std::size_t count, std::uint64_t seed,
                    const SampleOptions& opts,
                    const std::function<void(std::size_t, const Eigen::MatrixXd&)>& visit) {
  if (count == 0) throw ValidationError("sample: count must be >= 1");
  const Eigen::Index m = factor.size();
  const std::size_t blocks = (count + kSampleBlock - 1) / kSampleBlock;
  parallel_for(blocks, opts.workers, [&](std::size_t b) {
    const std::size_t first = b * kSampleBlock;
    const auto width = static_cast<Eigen::Index>(std::min(kSampleBlock, count - first));
    Eigen::MatrixXd z(m, width);
    for (Eigen::Index j = 0; j < width; ++j) {
      NormalStream normal(seed, opts.stream, first + static_cast<std::size_t>(j));
      for (Eigen::Index i = 0; i < m; ++i) z(i, j) = normal();
    }
    Eigen::MatrixXd x(m, width);
    x.noalias() = factor.lower.triangularView<Eigen::Lower>() * z;
    if (!x.allFinite()) throw NumericalError("sample: non-finite draw");
    visit(first, x);
  });
}

PathEnsemble sample(const CovMatrix& cov, const CholeskyFactor& factor, std::size_t count,
                    std::uint64_t seed, const SampleOptions& opts) {
  if (factor.size() != static_cast<Eigen::Index>(cov.grid.size())) {
    throw ValidationError("sample: factor does not match grid");
  }
  PathEnsemble ens{cov.grid, Eigen::MatrixXd(static_cast<Eigen::Index>(count), factor.size()),
                   seed, cov.provenance, factor.jitter_steps, factor.jitter};
  for_each_block(factor, count, seed, opts, [&](std::size_t first, const Eigen::MatrixXd& x) {
    ens.paths.middleRows(static_cast<Eigen::Index>(first), x.cols()) = x.transpose();
  });
  return ens;
}

PathEnsemble sample(const CovMatrix& cov, std::size_t count, std::uint64_t seed,
                    const SampleOptions& opts) {
  if (count == 0) throw ValidationError("sample: count must be >= 1");
  return sample(cov, factorize(cov), count, seed, opts);
}

std::vector<double> sample_max_abs(const CholeskyFactor& factor, std::size_t count,
                                   std::uint64_t seed, const SampleOptions& opts) {
  std::vector<double> out(count);
  for_each_block(factor, count, seed, opts, [&](std::size_t first, const Eigen::MatrixXd& x) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out[first + static_cast<std::size_t>(j)] = x.col(j).cwiseAbs().maxCoeff();
    }
  });
  return out;
}

PathEnsemble sample_fbm(const FbmSpec& spec, std::size_t count, std::uint64_t seed,
                        const SampleOptions& opts) {
  return sample(build_fbm_cov_matrix(spec.grid, spec.hurst_index), count, seed, opts);
}

}  // namespace cllb
