#pragma once

// Closed-form constants and limiting covariance kernels.

#include "rap/weight_law.hpp"

namespace rap {

struct Constants {
  double V = 0.0;
  double b = 0.0;  // characteristic speed, -V
  double sigma_D2 = 0.0;
  double sigma_a2 = 0.0;
  double beta = 1.0;
  double kappa = 0.0;
};

struct CovParams {
  double rho_bar = 0.0;  // mean increment at the base point
  double v_bar = 0.0;    // increment variance at the base point
};

struct CharLambdas {
  double lambda = 1.0;      // E|phi^omega(t)|^2
  double lambda_bar = 1.0;  // |E phi^omega(t)|^2
};

CharLambdas char_lambdas(const WeightLaw& law, double t);

// Integrand (1 - lambda)/(1 - lambda_bar) of the Fourier formula for beta,
// with t = 0 filled by its limit 1 - sigma_D2/sigma_a2.
double beta_integrand(const WeightLaw& law, double t);

// Throws SpanViolation for span != 1 and QuadratureFailure on budget overrun.
double beta_quadrature(const WeightLaw& law, double tol = 1e-11);

// E[u(0)u(-1)]/sigma_a2; throws UnsupportedLaw unless p is supported on {-1, 0}.
double beta_two_point(const WeightLaw& law);

// beta from the two-point formula when it applies, quadrature otherwise.
Constants compute_constants(const WeightLaw& law, double tol = 1e-11);
Constants make_constants(const DriftMoments& d, double beta);

struct GaussianValues {
  double pdf = 0.0;
  double cdf = 0.0;
  double psi = 0.0;
};

// var = 0 is the degenerate limit: pdf is NaN, cdf the unit step, psi max(-x, 0).
GaussianValues gaussian_helpers(double x, double var);
double gauss_pdf(double x, double var);
double gauss_cdf(double x, double var);
double gauss_sf(double x, double var);  // 1 - cdf without cancellation
double psi(double x, double var);

// Covariance kernels. Times must be nonnegative (DomainError otherwise).
double gamma_q(double s, double q, double t, double r, const Constants& c);
double gamma_q_integral(double s, double q, double t, double r, const Constants& c, double tol = 1e-12);
double gamma_0(double s, double q, double t, double r, double sigma_a2);

double rap_covariance(double s, double q, double t, double r, const CovParams& p, const Constants& c);

// Fixed-r temporal covariance, written through square roots.
double rap_covariance_temporal(double s, double t, const CovParams& p, const Constants& c);

// Stationary two-point marginal: sigma_a kappa rho^2/sqrt(2 pi) (sqrt s + sqrt t - sqrt|t-s|).
double fbm_covariance(double s, double t, double rho, const Constants& c);

// Limit variance coefficient of the forward quenched mean: Var a(t, r) = c_a sqrt(t).
double c_a(const Constants& c);

}  // namespace rap
