#pragma once

// The height process sigma_tau on a finite window, its initial data, and the
// rescaled fluctuation field z_n.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rap/environment.hpp"
#include "rap/lattice.hpp"
#include "rap/rwre.hpp"

namespace rap {

enum class ProfileFamily { Gaussian, Gamma, Deterministic };

// Initial increments eta_0(i) are independent with mean rho(i/n) and variance v(i/n).
struct InitProfile {
  ProfileFamily family = ProfileFamily::Deterministic;
  std::function<double(double)> rho;
  std::function<double(double)> v;
  double shape = 0.0;  // gamma family
  double rate = 0.0;
  std::string name;

  static InitProfile gaussian(std::function<double(double)> rho, std::function<double(double)> v,
                              std::string name = "gaussian");
  static InitProfile gamma(double shape, double rate);
  static InitProfile deterministic(std::function<double(double)> rho, std::string name = "deterministic");

  // Named presets: constant (rho = a, v = var), linear (rho = a + c x, v = var),
  // quadratic (rho = x^2, v = var), gamma (shape a, rate c). Gaussian unless var = 0.
  static InitProfile preset(const std::string& name, double a = 1.0, double c = 1.0, double var = 0.0);
};

struct HeightWindow {
  std::int64_t base = 0;  // site of heights[0]
  std::int64_t tau = 0;
  std::vector<double> heights;

  std::int64_t x_hi() const noexcept { return base + static_cast<std::int64_t>(heights.size()) - 1; }
  double at(std::int64_t x) const;  // DomainError outside the window
  // eta(i) = sigma(i) - sigma(i - 1) for i in [base + 1, x_hi].
  std::vector<double> increments() const;
};

// Heights on [lo, hi] at tau = 0 with sigma_0(0) = 0. Throws ProfileError if
// the variance profile is negative at a site that is drawn.
HeightWindow init_heights(const InitProfile& profile, long n, std::int64_t lo, std::int64_t hi, std::uint64_t seed);

// T steps of the height recursion, reading rows tau + 1, ..., tau + T. The
// window loses M sites on each side per step. Throws WindowExhausted if it
// empties or if the surviving window misses `keep`.
HeightWindow evolve(const HeightWindow& heights, const Environment& env, long steps,
                    std::optional<SiteRange> keep = std::nullopt);

struct ObservationGrid {
  double ybar = 0.0;
  long n = 1;
  std::vector<GridPoint> points;
};

struct FluctuationPoint {
  ScaledProcessPoint z;
  // Split of z through the dual walk; present when requested.
  double Y = 0.0;
  double H = 0.0;
  double H_mean_form = 0.0;  // rho(ybar) n^{-1/4} (E X - x)
  double sigma_end = 0.0;    // sigma_{[nt]} at the observed site
  double sigma_start = 0.0;  // sigma_0 at the base site
};

struct FluctuationField {
  std::vector<FluctuationPoint> points;
  std::int64_t lo0 = 0;            // level-0 window used
  std::vector<double> initial;     // sigma_0 over that window
};

// z_n(t, r) = n^{-1/4}(sigma_[nt](x + [ntb]) - sigma_0(x)), x = [n ybar] + [r sqrt n].
// Initial data are drawn from `profile` with seed `init_seed`.
FluctuationField z_n(const ObservationGrid& obs, const InitProfile& profile, const Environment& env,
                     std::uint64_t init_seed, bool split = false);

struct IncrementWindow {
  std::int64_t base = 0;  // site of values[0]
  std::int64_t tau = 0;
  std::vector<double> values;
};

// eta'(k) = u(k, 0) eta(k) + u(k - 1, -1) eta(k - 1) with row tau + 1; the
// window loses its leftmost site. Two-point laws only (UnsupportedLaw).
IncrementWindow increment_step_two_point(const IncrementWindow& eta, const Environment& env);

struct InvarianceReport {
  int m = 0, j = 0;
  double lambda = 0.0;
  long samples = 0;
  long steps = 0;
  double ks = 0.0;
  double ks_critical_1pct = 0.0;
  double mean = 0.0, mean_se = 0.0, mean_expected = 0.0;
  double variance = 0.0, variance_se = 0.0, variance_expected = 0.0;
  std::vector<double> values;
};

// Each sample is an independent periodic ring of n_sites increments started
// i.i.d. Gamma(m, lambda) and run T steps with Beta(j, m - j) weights; the
// sample is the increment at site 0.
InvarianceReport invariance_test(int m, int j, double lambda, int n_sites, long T, long samples,
                                 std::uint64_t base_seed = 1, int threads = 1);

}  // namespace rap
