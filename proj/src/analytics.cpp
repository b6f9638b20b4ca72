#include "rap/analytics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rap/errors.hpp"
#include "rap/kernels.hpp"
#include "rap/quadrature.hpp"

namespace rap {

namespace {

void require_times(double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0)) throw DomainError("covariance kernels need nonnegative times");
}

// 1 - lambda(t) = 2 sum_d k(d) sin^2(t d / 2); the sin^2 form avoids the
// cancellation in 1 - cos near t = 0.
double one_minus_char(const LatticeKernel& k, double t) {
  double acc = 0.0;
  for (int d = 1; d <= k.half_width; ++d) {
    const double s = std::sin(0.5 * t * d);
    acc += (k(d) + k(-d)) * s * s;
  }
  return 2.0 * acc;
}

}  // namespace

CharLambdas char_lambdas(const WeightLaw& law, double t) {
  const auto w = q_kernels(law);
  return {1.0 - one_minus_char(w.q, t), 1.0 - one_minus_char(w.qbar, t)};
}

double beta_integrand(const WeightLaw& law, double t) {
  const auto w = q_kernels(law);
  const double num = one_minus_char(w.q, t);
  const double den = one_minus_char(w.qbar, t);
  if (den == 0.0) {
    const auto& d = law.drift();
    return 1.0 - d.sigma_D2 / d.sigma_a2;
  }
  return num / den;
}

double beta_quadrature(const WeightLaw& law, double tol) {
  const auto w = q_kernels(law);
  const int span = lattice_span(law.annealed(), law.range());
  if (span != 1) throw SpanViolation("beta quadrature needs an annealed step law of span 1, got span " + std::to_string(span));
  const auto& d = law.drift();
  const double limit = 1.0 - d.sigma_D2 / d.sigma_a2;
  auto f = [&](double t) {
    const double den = one_minus_char(w.qbar, t);
    return den == 0.0 ? limit : one_minus_char(w.q, t) / den;
  };
  // Even integrand: (1/2pi) int_{-pi}^{pi} = (1/pi) int_0^pi.
  return adaptive_simpson(f, 0.0, std::numbers::pi, tol * std::numbers::pi) / std::numbers::pi;
}

double beta_two_point(const WeightLaw& law) {
  const int M = law.range();
  const auto& p = law.annealed();
  for (int j = -M; j <= M; ++j) {
    if ((j < -1 || j > 0) && p[static_cast<std::size_t>(j + M)] > 0.0) {
      throw UnsupportedLaw("two-point beta formula needs annealed support inside {-1, 0}");
    }
  }
  const double sa = law.drift().sigma_a2;
  if (sa <= 0.0) throw DomainError("two-point beta formula: sigma_a^2 = 0");
  return law.second_moments()(0, -1) / sa;
}

Constants make_constants(const DriftMoments& d, double beta) {
  Constants c;
  c.V = d.V;
  c.b = 0.0 - d.V;  // not -V: keeps b = +0 for symmetric laws
  c.sigma_D2 = d.sigma_D2;
  c.sigma_a2 = d.sigma_a2;
  c.beta = beta;
  c.kappa = d.sigma_D2 / (beta * d.sigma_a2);
  return c;
}

Constants compute_constants(const WeightLaw& law, double tol) {
  const auto& d = law.drift();
  if (!(d.sigma_a2 > 0.0)) throw DomainError("constants: annealed step variance is zero");
  double beta = 1.0;
  if (std::holds_alternative<DeterministicWeights>(law.variant())) {
    beta = 1.0;
  } else if (law.min_step() >= -1 && law.max_step() <= 0) {
    beta = beta_two_point(law);
  } else {
    beta = beta_quadrature(law, tol);
  }
  return make_constants(d, beta);
}

double gauss_pdf(double x, double var) {
  if (var < 0.0) throw DomainError("gaussian: negative variance");
  if (var == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double gauss_cdf(double x, double var) {
  if (var < 0.0) throw DomainError("gaussian: negative variance");
  if (var == 0.0) return x >= 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * var));
}

double gauss_sf(double x, double var) {
  if (var < 0.0) throw DomainError("gaussian: negative variance");
  if (var == 0.0) return x >= 0.0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(x / std::sqrt(2.0 * var));
}

double psi(double x, double var) {
  if (var < 0.0) throw DomainError("gaussian: negative variance");
  if (var == 0.0) return std::max(-x, 0.0);
  const double v = var * gauss_pdf(x, var) - x * gauss_sf(x, var);
  // Psi_var(x) = E(Z - x)^+ >= max(-x, 0); only roundoff can go below.
  return std::max(v, std::max(-x, 0.0));
}

GaussianValues gaussian_helpers(double x, double var) {
  if (var < 0.0) throw DomainError("gaussian: negative variance");
  return {gauss_pdf(x, var), gauss_cdf(x, var), psi(x, var)};
}

double gamma_q(double s, double q, double t, double r, const Constants& c) {
  require_times(s, t);
  const double d = std::abs(q - r);
  return c.kappa * (psi(d, c.sigma_a2 * (t + s)) - psi(d, c.sigma_a2 * std::abs(t - s)));
}

double gamma_q_integral(double s, double q, double t, double r, const Constants& c, double tol) {
  require_times(s, t);
  const double d = q - r;
  const double lo = std::sqrt(c.sigma_a2 * std::abs(t - s));
  const double hi = std::sqrt(c.sigma_a2 * (t + s));
  // v = w^2 turns phi_v(d) dv into 2 exp(-d^2/(2 w^2)) dw / sqrt(2 pi), smooth at w = 0.
  auto f = [d](double w) { return w == 0.0 ? (d == 0.0 ? 1.0 : 0.0) : std::exp(-0.5 * d * d / (w * w)); };
  const double scale = c.kappa / std::sqrt(2.0 * std::numbers::pi);
  const double integral = adaptive_simpson(f, lo, hi, tol / std::max(scale, 1e-300));
  return scale * integral;
}

double gamma_0(double s, double q, double t, double r, double sigma_a2) {
  require_times(s, t);
  const double d = std::abs(q - r);
  return psi(d, sigma_a2 * s) + psi(d, sigma_a2 * t) - psi(d, sigma_a2 * (s + t));
}

double rap_covariance(double s, double q, double t, double r, const CovParams& p, const Constants& c) {
  return p.rho_bar * p.rho_bar * gamma_q(s, q, t, r, c) + p.v_bar * gamma_0(s, q, t, r, c.sigma_a2);
}

double rap_covariance_temporal(double s, double t, const CovParams& p, const Constants& c) {
  require_times(s, t);
  const double k = std::sqrt(c.sigma_a2 / (2.0 * std::numbers::pi));
  const double dyn = c.kappa * (std::sqrt(s + t) - std::sqrt(std::abs(t - s)));
  const double init = std::sqrt(s) + std::sqrt(t) - std::sqrt(s + t);
  return k * (p.rho_bar * p.rho_bar * dyn + p.v_bar * init);
}

double fbm_covariance(double s, double t, double rho, const Constants& c) {
  require_times(s, t);
  return std::sqrt(c.sigma_a2) * c.kappa * rho * rho / std::sqrt(2.0 * std::numbers::pi) *
         (std::sqrt(s) + std::sqrt(t) - std::sqrt(std::abs(t - s)));
}

double c_a(const Constants& c) { return c.sigma_D2 / (c.beta * std::sqrt(std::numbers::pi * c.sigma_a2)); }

}  // namespace rap
