#include "rap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "rap/errors.hpp"

namespace rap {

CovarianceEstimate covariance_estimate(const Eigen::MatrixXd& samples) {
  const Eigen::Index R = samples.rows();
  const Eigen::Index C = samples.cols();
  if (R < 2) throw InsufficientReplicates("covariance needs at least 2 replicates, got " + std::to_string(R));
  CovarianceEstimate e;
  e.replicates = static_cast<long>(R);
  e.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd d = samples.rowwise() - e.mean.transpose();
  const Eigen::MatrixXd S = d.transpose() * d;
  e.cov = S / static_cast<double>(R - 1);
  e.se = Eigen::MatrixXd::Constant(C, C, std::numeric_limits<double>::quiet_NaN());
  if (R < 3) return e;
  // Leave-one-out cross products: S_(i) = S - R/(R-1) d_i d_i^T, so the
  // jackknife replicates C_(i) = S_(i)/(R-2) deviate from their mean by
  // -R/((R-1)(R-2)) (d_i d_i^T - S/R).
  const double Rd = static_cast<double>(R);
  const double k = Rd / ((Rd - 1.0) * (Rd - 2.0));
  for (Eigen::Index a = 0; a < C; ++a) {
    for (Eigen::Index b = a; b < C; ++b) {
      const double sbar = S(a, b) / Rd;
      double ss = 0.0;
      for (Eigen::Index i = 0; i < R; ++i) {
        const double dev = d(i, a) * d(i, b) - sbar;
        ss += dev * dev;
      }
      const double se = std::sqrt((Rd - 1.0) / Rd * k * k * ss);
      e.se(a, b) = se;
      e.se(b, a) = se;
    }
  }
  return e;
}

SampleMoments sample_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) throw InsufficientReplicates("moments need at least 2 samples");
  SampleMoments m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m.mean) * (v - m.mean);
    m2 += d;
    m4 += d * d;
  }
  m.variance = m2 / (n - 1.0);
  m.mean_se = std::sqrt(m.variance / n);
  const double mu2 = m2 / n;
  m.variance_se = std::sqrt(std::max(m4 / n - mu2 * mu2, 0.0) / n);
  return m;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DegenerateInput("scaling fit needs at least 3 scales");
  const double N = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0)) throw DegenerateInput("scaling fit: scale " + std::to_string(n) + " is not positive");
    if (!(v > 0.0)) throw DegenerateInput("scaling fit: variance " + std::to_string(v) + " at n = " + std::to_string(n) + " is not positive");
    sx += std::log(n);
    sy += std::log(v);
  }
  const double mx = sx / N, my = sy / N;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, v] : points) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw DegenerateInput("scaling fit: all scales equal");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (const auto& [n, v] : points) {
    const double r = std::log(v) - f.intercept - f.slope * std::log(n);
    rss += r * r;
  }
  const double s2 = points.size() > 2 ? rss / (N - 2.0) : 0.0;
  f.slope_se = std::sqrt(s2 / sxx);
  f.intercept_se = std::sqrt(s2 * (1.0 / N + mx * mx / sxx));
  return f;
}

double KsReport::critical_at(double alpha) const {
  for (const auto& [a, c] : critical) {
    if (a == alpha) return c;
  }
  return ks_critical(alpha, n);
}

double ks_critical(double alpha, long n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

KsReport ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 100) throw DomainError("ks_statistic needs at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  KsReport r;
  r.n = static_cast<long>(samples.size());
  for (std::size_t i = 0; i < samples.size();) {
    // Ties are one jump of the empirical CDF.
    std::size_t k = i;
    while (k < samples.size() && samples[k] == samples[i]) ++k;
    const double F = cdf(samples[i]);
    r.distance = std::max({r.distance, std::abs(F - static_cast<double>(i) / N), std::abs(static_cast<double>(k) / N - F)});
    i = k;
  }
  for (double alpha : {0.10, 0.05, 0.01, 0.001}) r.critical.emplace_back(alpha, ks_critical(alpha, r.n));
  return r;
}

double gamma_cdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return 0.0;
  return boost::math::gamma_p(shape, rate * x);
}

}  // namespace rap
