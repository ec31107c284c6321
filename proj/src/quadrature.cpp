#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cllb/covariance.hpp"
#include "cllb/error.hpp"

namespace cllb {

namespace {

[[noreturn]] void not_converged(const char* what, double achieved) {
  std::ostringstream os;
  os.precision(3);
  os << what << ": quadrature did not converge (achieved relative error " << achieved << ")";
  throw NumericalError(os.str());
}

constexpr double kAcceptRelErr = 1e-8;

}  // namespace

double spectral_profile_integral(double alpha, double hurst) {
  const double power = 1.0 - 2.0 * hurst;
  auto f = [=](double x) { return x == 0.0 ? 0.0 : std::exp(-std::pow(x, alpha)) * std::pow(x, power); };
  double err_head = 0.0;
  double err_tail = 0.0;
  double l1 = 0.0;
  boost::math::quadrature::tanh_sinh<double> ts;
  const double head = ts.integrate(f, 0.0, 1.0, 1e-13, &err_head, &l1);
  boost::math::quadrature::exp_sinh<double> es;
  const double tail = es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-13, &err_tail);
  const double total = head + tail;
  const double rel = (err_head + err_tail) / std::abs(total);
  if (!(rel <= kAcceptRelErr)) not_converged("spectral profile", rel);
  return total;
}

double cov_quadrature_window(double s, double t, double r_from, double r_to,
                             const ModelParams& params, double rel_tol) {
  validate(params);
  if (s > t) std::swap(s, t);
  if (!(s >= 0.0) || !(r_from >= 0.0) || !(r_to <= s) || !(r_from <= r_to)) {
    throw ValidationError("cov_quadrature: need 0 <= r_from <= r_to <= min(s,t)");
  }
  if (r_from == r_to) return 0.0;

  const double a = params.alpha;
  const double h = params.hurst;
  const double c_h = std::tgamma(2.0 * h + 1.0) * std::sin(std::numbers::pi * h) / (2.0 * std::numbers::pi);
  // int_R exp(-m |xi|^alpha) |xi|^(1-2H) dxi = 2 m^(-(2-2H)/alpha) * profile.
  const double profile = spectral_profile_integral(a, h);
  const double p = (2.0 - 2.0 * h) / a;
  const double top = t + s - 2.0 * r_to;

  // xc is the signed distance to the nearer endpoint, which keeps the singular
  // factor (t + s - 2r)^(-p) accurate as r -> r_to when s = t.
  auto g = [&](double r, double xc) {
    const double m = (xc > 0.0) ? top + 2.0 * xc : t + s - 2.0 * r;
    return std::pow(m, -p);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0;
  double l1 = 0.0;
  const double integral = ts.integrate(g, r_from, r_to, rel_tol, &err, &l1);
  const double rel = err / std::abs(integral);
  if (!(rel <= kAcceptRelErr)) not_converged("cov_quadrature", rel);
  return c_h * 2.0 * profile * integral;
}

double cov_quadrature(double s, double t, const ModelParams& params, double rel_tol) {
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  return cov_quadrature_window(s, t, 0.0, s, params, rel_tol);
}

}  // namespace cllb
