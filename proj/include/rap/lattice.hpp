#pragma once

// Single-level sweeps shared by the height evolution and the dual walk.
// Both read one environment row; the two-point uniform law takes a fused path
// that draws weights inline instead of materializing the row.

#include <cstdint>
#include <vector>

#include "rap/environment.hpp"

namespace rap {

struct StepSupport {
  int min_step = 0;
  int max_step = 0;
};

// Smallest and largest j with positive probability of u(0, j).
StepSupport step_support(const WeightLaw& law);

struct LatticeScratch {
  std::vector<double> weights;
};

// out(k) = sum_j u_tau(k, j) in(k + j) for k in [out_lo, out_lo + out_n).
// `in` starts at site in_lo and must cover [out_lo + min_step, out_lo + out_n - 1 + max_step].
void rap_step(const Environment& env, StepSupport s, std::int64_t tau, std::int64_t in_lo, const double* in,
              std::int64_t out_lo, double* out, std::size_t out_n, LatticeScratch& scratch);

// Transports a measure on [in_lo, in_lo + in_n) by the walk kernel of row `tau`:
// out(y) = sum_x in(x) u_tau(x, y - x). `out` covers
// [in_lo + min_step, in_lo + in_n - 1 + max_step] and is overwritten.
void walk_step(const Environment& env, StepSupport s, std::int64_t tau, std::int64_t in_lo, const double* in,
               std::size_t in_n, double* out, LatticeScratch& scratch);

}  // namespace rap

namespace rap {

// Lower integer part that treats values within 1e-9 (relative) of an integer
// as that integer, so n * t computed in floating point does not drop a site.
std::int64_t lattice_floor(double x);

struct SpaceTimePoint {
  std::int64_t x = 0;
  std::int64_t tau = 0;
};

// Sites [lo, hi] at level tau that the heights at `points` depend on: the hull
// of their backward light cones. Empty (lo > hi) once tau is above every point.
struct SiteRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;
};
SiteRange cone_window(const std::vector<SpaceTimePoint>& points, StepSupport s, std::int64_t tau);

// Runs the height recursion from level 0, where heights(x) = h0[x - lo0], and
// returns sigma_{tau}(x) for every requested point. Only the light cones of the
// points are swept. Throws WindowExhausted if h0 does not cover the level-0 cone.
std::vector<double> evolve_to_points(const Environment& env, std::int64_t lo0, const std::vector<double>& h0,
                                     const std::vector<SpaceTimePoint>& points);

}  // namespace rap
