#pragma once

// Exact Green functions G_n(x, 0) = sum_{k<=n} q^k(x, 0) of the perturbed
// difference walk, and the potential kernel of the homogeneous walk.

#include <cstdint>
#include <functional>
#include <vector>

#include "rap/analytics.hpp"
#include "rap/kernels.hpp"

namespace rap {

inline constexpr double kDefaultCellBudget = 2e9;

class GreenTable {
 public:
  long horizon() const noexcept { return n_; }
  int reach() const noexcept { return reach_; }

  // G_n(x, 0) at the final horizon; zero outside [-n*reach, n*reach].
  double at(std::int64_t x) const noexcept;
  // G_k(0, 0) for 0 <= k <= n.
  double diagonal(long k) const { return diag_.at(static_cast<std::size_t>(k)); }
  const std::vector<double>& diagonal() const noexcept { return diag_; }
  // G_k(x, 0) for a checkpoint horizon k requested at construction.
  double at(long k, std::int64_t x) const;
  bool has_checkpoint(long k) const noexcept;
  // Full final row, index x + n*reach.
  const std::vector<double>& row() const noexcept { return final_; }

 private:
  friend GreenTable green_table(const PerturbedWalk&, long, const std::vector<long>&, double);
  long n_ = 0;
  int reach_ = 0;
  std::vector<double> final_;
  std::vector<double> diag_;
  std::vector<long> checkpoint_k_;
  std::vector<std::vector<double>> checkpoint_rows_;  // each centered at k*reach
};

// Throws CapacityError when the accumulated number of cells sum_k (2k reach + 1)
// exceeds `cell_budget`.
GreenTable green_table(const PerturbedWalk& w, long n, const std::vector<long>& checkpoints = {},
                       double cell_budget = kDefaultCellBudget);

// Potential kernel abar(x) = lim_n [Gbar_n(0,0) - Gbar_n(x,0)] of a symmetric
// span-1 kernel. Nearest-neighbour kernels use |x|/var; otherwise abar is the
// solution of the harmonic equations on [-K, K] with exact linear far field.
class PotentialKernel {
 public:
  explicit PotentialKernel(const LatticeKernel& qbar, int solve_radius = 256);

  double operator()(std::int64_t x) const noexcept;
  bool closed_form() const noexcept { return closed_form_; }
  // sum_y qbar(x, y) abar(y) - abar(x); equals 1{x = 0} exactly.
  double harmonic_residual(std::int64_t x) const noexcept;

 private:
  LatticeKernel qbar_;
  double variance_ = 0.0;
  bool closed_form_ = false;
  int radius_ = 0;
  std::vector<double> values_;  // abar(0..radius)
};

double potential_kernel(const LatticeKernel& qbar, std::int64_t x);

// The defining limit, evaluated on Green tables at horizons n_start * 2^i until
// three successive values agree within tol. Throws NoConvergence past n_max.
double potential_kernel_by_green(const LatticeKernel& qbar, std::int64_t x, long n_max, double tol = 1e-8,
                                 long n_start = 64);

double beta_from_potential(const LatticeKernel& q, const std::function<double(std::int64_t)>& abar);
double beta_from_potential(const WeightLaw& law);

struct GreenAsymptoticRow {
  double x = 0.0;         // macroscopic position
  std::int64_t x_n = 0;   // lattice site round(x sqrt n)
  double green = 0.0;     // G_n(x_n, 0)
  double scaled = 0.0;    // n^{-1/2} G_n(x_n, 0)
  double limit = 0.0;
  double rel_err = 0.0;
};

struct GreenAsymptoticReport {
  long n = 0;
  std::vector<GreenAsymptoticRow> rows;
  double diag_limit = 0.0;       // 1/(beta sqrt(pi sigma_a2))
  double ratio_homogeneous = 0.0;  // Gbar_n(0,0)/G_n(0,0)
  double max_increment = 0.0;    // max_x |G_n(x,0) - G_n(x+1,0)|
};

// Limit of n^{-1/2} G_n(x sqrt n, 0).
double green_limit(double x, const Constants& c);

GreenAsymptoticReport green_asymptotics_report(const PerturbedWalk& w, const Constants& c, long n,
                                               const std::vector<double>& x_points);

}  // namespace rap
