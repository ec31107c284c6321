#include "cllb/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cllb/error.hpp"

namespace cllb {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("time grid must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i]) || points_[i] < 0.0) {
      throw ValidationError("time grid point " + std::to_string(i) + " is negative or non-finite");
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw ValidationError("time grid must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t m) {
  if (m == 0 || !(horizon > 0.0)) throw ValidationError("uniform grid needs m >= 1 and horizon > 0");
  std::vector<double> p(m);
  for (std::size_t k = 0; k < m; ++k) {
    p[k] = horizon * static_cast<double>(k + 1) / static_cast<double>(m);
  }
  p.back() = horizon;
  return TimeGrid(std::move(p));
}

TimeGrid TimeGrid::geometric(double lo, double hi, std::size_t m) {
  if (m < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw ValidationError("geometric grid needs m >= 2 and 0 < lo < hi");
  }
  std::vector<double> p(m);
  const double llo = std::log(lo);
  const double span = std::log(hi) - llo;
  for (std::size_t k = 0; k < m; ++k) {
    p[k] = std::exp(llo + span * static_cast<double>(k) / static_cast<double>(m - 1));
  }
  p.front() = lo;
  p.back() = hi;
  return TimeGrid(std::move(p));
}

TimeGrid TimeGrid::scaled(double rho) const {
  std::vector<double> p(points_);
  for (double& x : p) x *= rho;
  return TimeGrid(std::move(p));
}

std::string_view to_string(Provenance p) {
  return p == Provenance::closed_form ? "closed-form" : "quadrature";
}

namespace {

void require_nonneg(double s, double t, const char* who) {
  if (!(s >= 0.0) || !(t >= 0.0)) {
    throw ValidationError(std::string(who) + ": times must be >= 0");
  }
}

}  // namespace

double cov_closed(double s, double t, const DerivedConstants& c) {
  require_nonneg(s, t, "cov_closed");
  const double k = 2.0 * c.theta;
  return c.c21 * std::pow(2.0, -k) * (std::pow(t + s, k) - std::pow(std::abs(t - s), k));
}

double cov_un_closed(double s, double t, double slab_start, const DerivedConstants& c) {
  if (!(s >= slab_start) || !(t >= slab_start) || !(slab_start >= 0.0)) {
    throw ValidationError("cov_un_closed: s and t must be >= slab_start >= 0");
  }
  const double k = 2.0 * c.theta;
  const double lead = (t - slab_start) + (s - slab_start);
  return c.c21 * std::pow(2.0, -k) * (std::pow(lead, k) - std::pow(std::abs(t - s), k));
}

double cov_yn_closed(double s, double t, double slab_start, const DerivedConstants& c) {
  if (!(s >= slab_start) || !(t >= slab_start) || !(slab_start >= 0.0)) {
    throw ValidationError("cov_yn_closed: s and t must be >= slab_start >= 0");
  }
  const double k = 2.0 * c.theta;
  const double lead = (t - slab_start) + (s - slab_start);
  return c.c21 * std::pow(2.0, -k) * (std::pow(t + s, k) - std::pow(lead, k));
}

double var_yn(double t, double slab_start, const DerivedConstants& c) {
  if (!(t >= slab_start) || !(slab_start >= 0.0)) {
    throw ValidationError("var_yn: requires t >= slab_start >= 0");
  }
  const double k = 2.0 * c.theta;
  return c.c21 * (std::pow(t, k) - std::pow(t - slab_start, k));
}

double canonical_metric(double s, double t, const DerivedConstants& c) {
  if (s == t) return 0.0;
  const double d2 = cov_closed(s, s, c) + cov_closed(t, t, c) - 2.0 * cov_closed(s, t, c);
  return std::sqrt(std::max(d2, 0.0));
}

namespace {

template <class Kernel>
CovMatrix fill(const TimeGrid& grid, Kernel&& kernel, std::optional<double> slab_start) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = kernel(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  check_psd(a);
  return CovMatrix{grid, std::move(a), Provenance::closed_form, slab_start};
}

}  // namespace

CovMatrix build_cov_matrix(const TimeGrid& grid, const DerivedConstants& c,
                           std::optional<double> slab_start) {
  if (slab_start) {
    const double a = *slab_start;
    if (!(a >= 0.0) || !(a <= grid.front())) {
      throw ValidationError("build_cov_matrix: slab_start must lie in [0, min(grid)]");
    }
    return fill(grid, [&](double s, double t) { return cov_un_closed(s, t, a, c); }, slab_start);
  }
  return fill(grid, [&](double s, double t) { return cov_closed(s, t, c); }, std::nullopt);
}

CovMatrix build_yn_cov_matrix(const TimeGrid& grid, const DerivedConstants& c, double slab_start) {
  if (!(slab_start >= 0.0) || !(slab_start <= grid.front())) {
    throw ValidationError("build_yn_cov_matrix: slab_start must lie in [0, min(grid)]");
  }
  return fill(grid, [&](double s, double t) { return cov_yn_closed(s, t, slab_start, c); },
              slab_start);
}

CovMatrix build_fbm_cov_matrix(const TimeGrid& grid, double hurst_index) {
  if (!(hurst_index > 0.0) || !(hurst_index < 1.0)) {
    throw ValidationError("fBm hurst index must lie in (0,1)");
  }
  const double k = 2.0 * hurst_index;
  return fill(
      grid,
      [k](double s, double t) {
        return 0.5 * (std::pow(s, k) + std::pow(t, k) - std::pow(std::abs(t - s), k));
      },
      std::nullopt);
}

namespace {

double largest_eigenvalue(const Eigen::MatrixXd& a) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd w = a.selfadjointView<Eigen::Lower>() * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (it > 5 && std::abs(next - lambda) <= 1e-6 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

[[noreturn]] void report_violation(double min_eig, double max_eig) {
  std::ostringstream os;
  os.precision(6);
  os << "covariance matrix not PSD: smallest eigenvalue " << min_eig << " below floor (largest "
     << max_eig << ")";
  throw NumericalError(os.str());
}

}  // namespace

void check_psd(const Eigen::MatrixXd& a, double rel_floor) {
  if (a.rows() == 0) return;
  if (a.rows() <= 512) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(a.rows() - 1);
    if (lo < -rel_floor * std::max(hi, 0.0)) report_violation(lo, hi);
    return;
  }
  // Power iteration approaches the top eigenvalue from below, so the shift can only
  // be slightly tighter than the stated floor.
  const double hi = largest_eigenvalue(a);
  Eigen::MatrixXd shifted = a;
  shifted.diagonal().array() += rel_floor * std::max(hi, 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() == Eigen::Success) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  const double top = es.eigenvalues()(a.rows() - 1);
  if (lo < -rel_floor * std::max(top, 0.0)) report_violation(lo, top);
}

}  // namespace cllb
