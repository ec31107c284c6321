#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cllb/params.hpp"

namespace cllb {

/// Strictly increasing, non-negative sample times.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// k/m for k = 1..m, so the grid covers (0, horizon] and skips the pinned origin.
  static TimeGrid uniform(double horizon, std::size_t m);
  /// lo * (hi/lo)^(k/(m-1)) with both endpoints exact.
  static TimeGrid geometric(double lo, double hi, std::size_t m);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  TimeGrid scaled(double rho) const;

 private:
  std::vector<double> points_;
};

enum class Provenance { closed_form, quadrature };

std::string_view to_string(Provenance p);

struct CovMatrix {
  TimeGrid grid;
  Eigen::MatrixXd entries;
  Provenance provenance = Provenance::closed_form;
  /// Start of the noise window for the slab field u_n; empty for the full solution.
  std::optional<double> slab_start;
};

// Closed forms. With a the start of the noise window,
//   Cov(u_a(s), u_a(t)) = c21 2^(-2 theta) ((t + s - 2a)^(2 theta) - |t - s|^(2 theta)),
// which is the time integral of C_H * int e^{-(t+s-2r)|xi|^alpha} |xi|^(1-2H) dxi over r in [a, s∧t].

/// Covariance of u(s,x), u(t,x). Zero whenever s or t is zero.
double cov_closed(double s, double t, const DerivedConstants& c);

/// Covariance of the slab field driven by noise on [slab_start, .). Throws
/// ValidationError if s or t is below slab_start.
double cov_un_closed(double s, double t, double slab_start, const DerivedConstants& c);

/// Covariance of Y = u - u_n, driven by noise on [0, slab_start).
double cov_yn_closed(double s, double t, double slab_start, const DerivedConstants& c);

/// Var Y_n(t) = c21 (t^(2 theta) - (t - slab_start)^(2 theta)).
double var_yn(double t, double slab_start, const DerivedConstants& c);

/// sqrt(R(s,s) + R(t,t) - 2 R(s,t)).
double canonical_metric(double s, double t, const DerivedConstants& c);

/// Numerical evaluation of the spectral double integral over r in [r_from, r_to], r_to <= s ∧ t.
/// The xi-integral is rescaled to the fixed profile int_0^inf exp(-x^alpha) x^(1-2H) dx which
/// is integrated numerically; the r-integral runs on a tanh-sinh rule. Throws NumericalError
/// when the requested relative tolerance is not reached.
double cov_quadrature_window(double s, double t, double r_from, double r_to,
                             const ModelParams& params, double rel_tol = 1e-10);

/// Full-solution covariance by quadrature; s and t may be given in either order.
double cov_quadrature(double s, double t, const ModelParams& params, double rel_tol = 1e-10);

/// The absolute spectral moment int_0^inf exp(-x^alpha) x^(1-2H) dx by quadrature.
double spectral_profile_integral(double alpha, double hurst);

/// Fills the matrix from cov_closed (or cov_un_closed when slab_start is set) and
/// checks the PSD floor. Throws NumericalError carrying the offending eigenvalue.
CovMatrix build_cov_matrix(const TimeGrid& grid, const DerivedConstants& c,
                           std::optional<double> slab_start = std::nullopt);

/// Same, for Y_n on a slab; used for joint sampling of u_n and Y_n.
CovMatrix build_yn_cov_matrix(const TimeGrid& grid, const DerivedConstants& c, double slab_start);

/// fBm covariance 0.5 (s^2h + t^2h - |t-s|^2h) on the grid.
CovMatrix build_fbm_cov_matrix(const TimeGrid& grid, double hurst_index);

/// Smallest eigenvalue must be >= -rel_floor * largest. Small matrices are checked by a
/// full eigen-decomposition; large ones by a Cholesky of the shifted matrix, falling back
/// to the eigen-decomposition only to report the violation.
void check_psd(const Eigen::MatrixXd& a, double rel_floor = 1e-10);

}  // namespace cllb
