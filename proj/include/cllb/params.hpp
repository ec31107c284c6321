#pragma once

#include <string>
#include <vector>

namespace cllb {

/// Parameters of the linear stochastic fractional heat equation observed at a fixed
/// spatial point: order of the fractional Laplacian, spatial Hurst index of the noise,
/// and the exponent of the localization sequence t_n = exp(-n^(1+beta)).
struct ModelParams {
  double alpha = 2.0;
  double hurst = 0.5;
  double beta = 1.0;
};

/// Constants derived from ModelParams.
///
/// theta is the temporal Hurst index of t -> u(t,x); c_h is the spectral constant
/// of the noise; c21 is the variance coefficient (Var u(t,x) = c21 t^(2 theta));
/// kappa is the scale of the fBm component and enters the Chung constant kappa*lambda^theta.
struct DerivedConstants {
  double theta = 0.0;
  double c_h = 0.0;
  double c21 = 0.0;
  double kappa = 0.0;
};

/// Largest admissible hurst for a given alpha. Beyond it Gamma(1 - 2 theta) is
/// too close to its pole for double precision to be trustworthy.
double hurst_conditioning_limit(double alpha);

/// Returns params unchanged when 1 < alpha <= 2, (2 - alpha)/2 < hurst < 1 and
/// beta > 0, otherwise throws ValidationError naming the violated bound. All bounds
/// are strict with no tolerance. Also rejects hurst above hurst_conditioning_limit.
ModelParams validate(const ModelParams& params);

DerivedConstants derive(const ModelParams& params);

double temporal_hurst(double alpha, double hurst);

/// c21 as written in the solution's variance law:
/// C_H / (2H + alpha - 2) * 2^((2H + alpha - 2)/alpha) * Gamma((2 - 2H)/alpha).
double c21_reference_form(double alpha, double hurst);

/// c21 rewritten through 2H + alpha - 2 = 2 alpha theta:
/// C_H * 2^(2 theta) * Gamma(1 - 2 theta) / (2 alpha theta).
double c21_theta_form(double alpha, double hurst);

/// psi(t) = (t / log log(1/t))^theta on 0 < t < 1/e.
double psi(double t, double theta);

/// t_n = exp(-n^(1+beta)).
double t_seq(int n, double beta);

/// log log(1/t_n) = (1 + beta) log n, evaluated without forming t_n.
double loglog_inv_t_seq(int n, double beta);

/// Checks t_{n+1}/t_n <= exp(-(1+beta) n^beta), comparing logarithms so that it
/// stays meaningful after t_n underflows.
bool t_seq_ratio_bound_holds(int n, double beta);

/// Largest n with n^(1+beta) < 690, i.e. t_n > 1e-300.
int t_seq_underflow_limit(double beta);

}  // namespace cllb
