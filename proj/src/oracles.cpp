#include "rap/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rap::oracle {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double integrate(auto f, double a, double b) {
  if (!(b > a)) return 0.0;
  return GK::integrate(f, a, b, 12, 1e-13);
}

}  // namespace

double gamma_0_integral(double s, double q, double t, double r, double sigma_a2) {
  if (s == 0.0 || t == 0.0) return 0.0;
  const boost::math::normal Bs(0.0, std::sqrt(sigma_a2 * s));
  const boost::math::normal Bt(0.0, std::sqrt(sigma_a2 * t));
  auto above_s = [&](double x) { return boost::math::cdf(boost::math::complement(Bs, x - q)); };
  auto above_t = [&](double x) { return boost::math::cdf(boost::math::complement(Bt, x - r)); };
  auto below_s = [&](double x) { return boost::math::cdf(Bs, x - q); };
  auto below_t = [&](double x) { return boost::math::cdf(Bt, x - r); };
  const double cut = 12.0 * std::sqrt(sigma_a2 * std::max(s, t));
  const double hi = std::max(q, r);
  const double lo = std::min(q, r);

  double total = integrate([&](double x) { return above_s(x) * above_t(x); }, hi, hi + cut);
  if (r > q) total -= integrate([&](double x) { return above_s(x) * below_t(x); }, q, r);
  if (q > r) total -= integrate([&](double x) { return below_s(x) * above_t(x); }, r, q);
  total += integrate([&](double x) { return below_s(x) * below_t(x); }, lo - cut, lo);
  return total;
}

double beta_fourier(const WeightLaw& law) {
  const int M = law.range();
  const auto& p = law.annealed();
  const auto& S = law.second_moments();
  // 1 - cos(u) is written as 2 sin^2(u/2) in both double sums; near t = 0 the
  // plain form loses every digit.
  auto half_angle = [](double u) {
    const double s = std::sin(0.5 * u);
    return 2.0 * s * s;
  };
  auto ratio = [&](double t) {
    double num = 0.0, den = 0.0;
    for (int x = -M; x <= M; ++x)
      for (int y = -M; y <= M; ++y) {
        const double h = half_angle(t * (x - y));
        num += S(x, y) * h;
        den += p[static_cast<std::size_t>(x + M)] * p[static_cast<std::size_t>(y + M)] * h;
      }
    return num / den;
  };
  // Gauss nodes never touch t = 0, where the ratio is 0/0.
  double acc = 0.0;
  const double edges[] = {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, std::numbers::pi};
  for (std::size_t i = 0; i + 1 < std::size(edges); ++i) acc += integrate(ratio, edges[i], edges[i + 1]);
  return acc / std::numbers::pi;
}

double potential_kernel_fourier(const LatticeKernel& qbar, std::int64_t x) {
  auto sin2 = [](double u) {
    const double s = std::sin(0.5 * u);
    return s * s;
  };
  auto f = [&](double t) {
    double den = 0.0;
    for (int y = -qbar.half_width; y <= qbar.half_width; ++y) den += qbar(y) * sin2(t * y);
    return sin2(static_cast<double>(x) * t) / den;
  };
  // Split so the oscillation of cos(x t) is resolved panel by panel.
  const int panels = static_cast<int>(std::max<std::int64_t>(8, 4 * (x < 0 ? -x : x)));
  const double h = std::numbers::pi / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) acc += integrate(f, h * i, h * (i + 1));
  return acc / std::numbers::pi;
}

}  // namespace rap::oracle
