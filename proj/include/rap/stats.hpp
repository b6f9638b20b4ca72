#pragma once

// Replicate-level estimators: covariances with jackknife errors, log-log
// scaling fits, and Kolmogorov-Smirnov distances.

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rap {

struct CovarianceEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased, divisor R - 1
  Eigen::MatrixXd se;   // jackknife over replicates; NaN when R = 2
  long replicates = 0;
};

// `samples` is replicates x cells. Throws InsufficientReplicates for R < 2.
CovarianceEstimate covariance_estimate(const Eigen::MatrixXd& samples);

struct SampleMoments {
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;  // from the sample fourth central moment
};
SampleMoments sample_moments(const std::vector<double>& x);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

// Least squares of log(variance) on log(n). Needs at least 3 scales and
// positive variances (DegenerateInput).
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& points);

struct KsReport {
  double distance = 0.0;
  long n = 0;
  std::vector<std::pair<double, double>> critical;  // (alpha, asymptotic critical distance)
  double critical_at(double alpha) const;
};

// Asymptotic critical value sqrt(-log(alpha/2)/2)/sqrt(n).
double ks_critical(double alpha, long n);

// sup |F_N - F| over the sample. Needs at least 100 samples (DomainError).
KsReport ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Gamma(shape, rate) distribution function via the regularized incomplete gamma.
double gamma_cdf(double x, double shape, double rate);

}  // namespace rap
