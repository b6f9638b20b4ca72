#pragma once

// Reference implementations that share no code path with the production
// routines they check: Gauss-Kronrod instead of Simpson, the defining
// integrals instead of closed forms, double sums over the moment tables
// instead of the difference kernels.

#include <cstdint>

#include "rap/kernels.hpp"
#include "rap/weight_law.hpp"

namespace rap::oracle {

// Four-piece Brownian tail integral for Gamma_0 with infinite ranges cut at 12 sd.
double gamma_0_integral(double s, double q, double t, double r, double sigma_a2);

// (1/2pi) int_{-pi}^{pi} (1 - E|phi|^2)/(1 - |E phi|^2) dt from the double sums
// over S(x, y) and p(x) p(y).
double beta_fourier(const WeightLaw& law);

// (1/2pi) int_{-pi}^{pi} (1 - cos(x t))/(1 - phibar(t)) dt, phibar the
// characteristic function of qbar.
double potential_kernel_fourier(const LatticeKernel& qbar, std::int64_t x);

}  // namespace rap::oracle
