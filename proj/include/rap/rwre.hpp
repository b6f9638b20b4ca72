#pragma once

// Backward and forward walks in a fixed space-time environment. Quenched
// quantities are computed exactly by transporting the pmf; no paths are drawn.

#include <cstdint>
#include <vector>

#include "rap/environment.hpp"
#include "rap/lattice.hpp"

namespace rap {

enum class Direction { Backward, Forward };

struct QuenchedDistribution {
  std::int64_t start = 0;  // i
  std::int64_t tau = 0;    // level of the start point
  long steps = 0;
  Direction direction = Direction::Backward;
  std::int64_t x_lo = 0;
  std::vector<double> pmf;  // sites x_lo, x_lo + 1, ...

  std::int64_t x_hi() const noexcept { return x_lo + static_cast<std::int64_t>(pmf.size()) - 1; }
  std::int64_t level() const noexcept { return direction == Direction::Backward ? tau - steps : tau + steps; }
  double at(std::int64_t x) const noexcept;
  double mass() const noexcept;
  double mean() const noexcept;
};

// k steps from (i, tau). Backward walks read rows tau, tau - 1, ..., tau - k + 1
// and need tau >= k (TimeUnderflow otherwise); forward walks read rows
// tau, ..., tau + k - 1.
QuenchedDistribution propagate(const Environment& env, std::int64_t i, std::int64_t tau, long k, Direction dir);

// Quenched means E X_k from (i, tau) for every k in `steps`, from one propagation.
std::vector<double> quenched_means(const Environment& env, std::int64_t i, std::int64_t tau,
                                   const std::vector<long>& steps, Direction dir);

// E X^{x, tau}_tau for many backward start points at once. By duality this is
// the height at (x, tau) of the process started from sigma_0(x) = x, so one
// sweep over the union of light cones serves every point.
std::vector<double> backward_means_to_zero(const Environment& env, const std::vector<SpaceTimePoint>& points);

struct ScaledProcessPoint {
  long n = 0;
  double t = 0.0;
  double r = 0.0;
  double value = 0.0;
};

struct GridPoint {
  double t = 0.0;
  double r = 0.0;
};

// n^{-1/4}(E X^{[ntb]+[r sqrt n], [nt]}_{[nt]} - [r sqrt n]), b = -V, with the
// offset [n ybar] added to both the start site and the centering.
ScaledProcessPoint y_n(const Environment& env, long n, double t, double r, double ybar = 0.0);

// n^{-1/4}(E Z^{[r sqrt n], 0}_{[nt]} - [r sqrt n] - [nt] V).
ScaledProcessPoint a_n(const Environment& env, long n, double t, double r);

// The same quantities on a grid, sharing work between points.
std::vector<ScaledProcessPoint> y_n_grid(const Environment& env, long n, const std::vector<GridPoint>& grid,
                                         double ybar = 0.0);
std::vector<ScaledProcessPoint> a_n_grid(const Environment& env, long n, const std::vector<GridPoint>& grid);

enum class VarianceMode { MonteCarlo, Exhaustive };

struct VarianceEstimate {
  long n = 0;
  double estimate = 0.0;
  double std_err = 0.0;
  long replicates = 0;  // 0 in exhaustive mode
};

// E[(E X^{0,n}_n - nV)^2]. Replicate i uses replicate_seed(base_seed, i).
// Exhaustive mode needs a finite mixture and n <= 6 and is exact; it throws
// CapacityError when the enumeration would exceed its leaf budget.
VarianceEstimate quenched_mean_variance(const WeightLaw& law, long n, long replicates, VarianceMode mode,
                                        std::uint64_t base_seed = 1, int threads = 1);

// Monte Carlo estimates for several n from the same environments.
std::vector<VarianceEstimate> quenched_mean_variance_scan(const WeightLaw& law, const std::vector<long>& ns,
                                                          long replicates, std::uint64_t base_seed = 1,
                                                          int threads = 1);

struct DifferenceReport {
  long n = 0;
  std::int64_t x = 0;
  std::int64_t y = 0;
  double estimate = 0.0;
  double std_err = 0.0;
  double theory = 0.0;  // 2 sigma_D^2 (G_{n-1}(0,0) - G_{n-1}(x-y,0))
  long replicates = 0;
};

// E[((E X^{x,n}_n - x) - (E X^{y,n}_n - y))^2] against the Green-function value.
DifferenceReport difference_variance_check(const WeightLaw& law, long n, std::int64_t x, std::int64_t y,
                                           long replicates, VarianceMode mode, std::uint64_t base_seed = 1,
                                           int threads = 1);

// Quenched probability that the centered backward walk from (0, n) reaches
// c n^{1/2 + gamma} within n steps. Computed exactly by absorbing mass at the
// moving barrier.
double moderate_deviation_probe(const Environment& env, long n, double c, double gamma);

}  // namespace rap
