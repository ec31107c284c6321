#include "cllb/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cllb/error.hpp"

namespace cllb {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double noise_constant(double hurst) {
  return std::tgamma(2.0 * hurst + 1.0) * std::sin(kPi * hurst) / (2.0 * kPi);
}

}  // namespace

double hurst_conditioning_limit(double alpha) { return 1.0 - 1e-6 * alpha / 2.0; }

ModelParams validate(const ModelParams& params) {
  const double a = params.alpha;
  const double h = params.hurst;
  if (!std::isfinite(a) || !(a > 1.0) || !(a <= 2.0)) {
    throw ValidationError("alpha=" + fmt(a) + " out of (1,2]");
  }
  const double lower = (2.0 - a) / 2.0;
  if (!std::isfinite(h) || !(h > lower)) {
    throw ValidationError("hurst=" + fmt(h) + " violates H > (2-alpha)/2 = " + fmt(lower));
  }
  if (!(h < 1.0)) {
    throw ValidationError("hurst=" + fmt(h) + " violates H < 1");
  }
  if (h > hurst_conditioning_limit(a)) {
    throw ValidationError("hurst=" + fmt(h) + " exceeds conditioning limit 1 - 1e-6*alpha/2 = " +
                          fmt(hurst_conditioning_limit(a)) + " (Gamma(1-2theta) near its pole)");
  }
  if (!std::isfinite(params.beta) || !(params.beta > 0.0)) {
    throw ValidationError("beta=" + fmt(params.beta) + " violates beta > 0");
  }
  return params;
}

double temporal_hurst(double alpha, double hurst) { return 0.5 - (1.0 - hurst) / alpha; }

double c21_reference_form(double alpha, double hurst) {
  const double q = 2.0 * hurst + alpha - 2.0;
  return noise_constant(hurst) / q * std::pow(2.0, q / alpha) *
         std::tgamma((2.0 - 2.0 * hurst) / alpha);
}

double c21_theta_form(double alpha, double hurst) {
  const double theta = temporal_hurst(alpha, hurst);
  return noise_constant(hurst) * std::pow(2.0, 2.0 * theta) * std::tgamma(1.0 - 2.0 * theta) /
         (2.0 * alpha * theta);
}

DerivedConstants derive(const ModelParams& params) {
  validate(params);
  const double a = params.alpha;
  const double h = params.hurst;
  DerivedConstants c;
  c.theta = temporal_hurst(a, h);
  c.c_h = noise_constant(h);
  c.c21 = c21_theta_form(a, h);
  const double kappa_sq = h * std::tgamma(2.0 * h) * std::tgamma(1.0 - 2.0 * c.theta) *
                          std::sin(kPi * h) / (kPi * a * c.theta);
  c.kappa = std::sqrt(kappa_sq);
  return c;
}

double psi(double t, double theta) {
  if (!(t > 0.0) || !(t < std::exp(-1.0))) {
    throw ValidationError("psi: t=" + fmt(t) + " outside (0, 1/e)");
  }
  return std::pow(t / std::log(std::log(1.0 / t)), theta);
}

double t_seq(int n, double beta) {
  if (n < 1) throw ValidationError("t_seq: n=" + std::to_string(n) + " must be >= 1");
  if (!(beta > 0.0)) throw ValidationError("t_seq: beta must be > 0");
  return std::exp(-std::pow(static_cast<double>(n), 1.0 + beta));
}

double loglog_inv_t_seq(int n, double beta) {
  return (1.0 + beta) * std::log(static_cast<double>(n));
}

bool t_seq_ratio_bound_holds(int n, double beta) {
  const double nd = static_cast<double>(n);
  const double log_ratio = std::pow(nd, 1.0 + beta) - std::pow(nd + 1.0, 1.0 + beta);
  return log_ratio <= -(1.0 + beta) * std::pow(nd, beta);
}

int t_seq_underflow_limit(double beta) {
  int n = 1;
  while (std::pow(static_cast<double>(n + 1), 1.0 + beta) < 690.0) ++n;
  return n;
}

}  // namespace cllb
