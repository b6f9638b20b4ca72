#include "rap/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "rap/errors.hpp"
#include "rap/parallel.hpp"

namespace rap {

namespace {

bool uniform_two_point(const Environment& env) { return env.two_point() && env.law().is_uniform_two_point(); }

}  // namespace

StepSupport step_support(const WeightLaw& law) { return {law.min_step(), law.max_step()}; }

void rap_step(const Environment& env, StepSupport s, std::int64_t tau, std::int64_t in_lo, const double* in,
              std::int64_t out_lo, double* out, std::size_t out_n, LatticeScratch& scratch) {
  if (out_n == 0) return;
  const double* base = in + (out_lo - in_lo);  // base[i] is in(out_lo + i)
  if (uniform_two_point(env)) {
    const std::uint64_t rk = env.row_key(tau);
    for (std::size_t i = 0; i < out_n; ++i) {
      const double u = Environment::uniform_left(rk, out_lo + static_cast<std::int64_t>(i));
      const double a = base[i];
      out[i] = a + u * (base[i - 1] - a);
    }
    return;
  }
  const std::int64_t out_hi = out_lo + static_cast<std::int64_t>(out_n) - 1;
  if (env.two_point()) {
    env.fill_left_weights(tau, out_lo, out_hi, scratch.weights);
    const double* u = scratch.weights.data();
    for (std::size_t i = 0; i < out_n; ++i) out[i] = base[i] + u[i] * (base[i - 1] - base[i]);
    return;
  }
  env.fill_row(tau, out_lo, out_hi, scratch.weights);
  const int M = env.range();
  const std::size_t w = static_cast<std::size_t>(2 * M + 1);
  for (std::size_t i = 0; i < out_n; ++i) {
    const double* u = scratch.weights.data() + i * w + M;
    double acc = 0.0;
    for (int j = s.min_step; j <= s.max_step; ++j) acc += u[j] * base[static_cast<std::ptrdiff_t>(i) + j];
    out[i] = acc;
  }
}

void walk_step(const Environment& env, StepSupport s, std::int64_t tau, std::int64_t in_lo, const double* in,
               std::size_t in_n, double* out, LatticeScratch& scratch) {
  const std::size_t out_n = in_n + static_cast<std::size_t>(s.max_step - s.min_step);
  if (in_n == 0) return;
  const std::int64_t in_hi = in_lo + static_cast<std::int64_t>(in_n) - 1;
  if (env.two_point()) {
    // out index o is site in_lo - 1 + o: mass moving left from o, staying from o - 1.
    if (uniform_two_point(env)) {
      const std::uint64_t rk = env.row_key(tau);
      scratch.weights.resize(in_n);
      double* u = scratch.weights.data();
      for (std::size_t i = 0; i < in_n; ++i) u[i] = Environment::uniform_left(rk, in_lo + static_cast<std::int64_t>(i));
    } else {
      env.fill_left_weights(tau, in_lo, in_hi, scratch.weights);
    }
    const double* u = scratch.weights.data();
    out[0] = in[0] * u[0];
    for (std::size_t o = 1; o < in_n; ++o) out[o] = in[o] * u[o] + in[o - 1] * (1.0 - u[o - 1]);
    out[in_n] = in[in_n - 1] * (1.0 - u[in_n - 1]);
    return;
  }
  std::fill(out, out + out_n, 0.0);
  const int M = env.range();
  const std::size_t w = static_cast<std::size_t>(2 * M + 1);
  env.fill_row(tau, in_lo, in_hi, scratch.weights);
  for (std::size_t i = 0; i < in_n; ++i) {
    const double m = in[i];
    if (m == 0.0) continue;
    const double* u = scratch.weights.data() + i * w + M;
    double* dst = out + i - s.min_step;
    for (int j = s.min_step; j <= s.max_step; ++j) dst[j] += m * u[j];
  }
}

}  // namespace rap

namespace rap {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::int64_t lattice_floor(double x) {
  const double r = std::nearbyint(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(x));
}

SiteRange cone_window(const std::vector<SpaceTimePoint>& points, StepSupport s, std::int64_t tau) {
  SiteRange w{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::min()};
  bool any = false;
  for (const auto& p : points) {
    if (p.tau < tau) continue;
    any = true;
    w.lo = std::min(w.lo, p.x + s.min_step * (p.tau - tau));
    w.hi = std::max(w.hi, p.x + s.max_step * (p.tau - tau));
  }
  if (!any) return {};
  return w;
}

std::vector<double> evolve_to_points(const Environment& env, std::int64_t lo0, const std::vector<double>& h0,
                                     const std::vector<SpaceTimePoint>& points) {
  const StepSupport s = step_support(env.law());
  std::vector<double> result(points.size(), 0.0);
  if (points.empty()) return result;
  std::int64_t top = 0;
  for (const auto& p : points) {
    if (p.tau < 0) throw DomainError("evolve: negative time level");
    top = std::max(top, p.tau);
  }
  const SiteRange need = cone_window(points, s, 0);
  const std::int64_t hi0 = lo0 + static_cast<std::int64_t>(h0.size()) - 1;
  if (need.lo < lo0 || need.hi > hi0) {
    throw WindowExhausted("evolve: initial window [" + std::to_string(lo0) + ", " + std::to_string(hi0) +
                          "] does not cover [" + std::to_string(need.lo) + ", " + std::to_string(need.hi) + "]");
  }

  // Points grouped by level so each level is visited once.
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].tau < points[b].tau; });

  std::vector<double> cur(h0.begin() + (need.lo - lo0), h0.begin() + (need.hi - lo0 + 1));
  std::vector<double> next;
  std::int64_t cur_lo = need.lo;
  LatticeScratch scratch;
  std::size_t k = 0;
  for (std::int64_t tau = 0;; ++tau) {
    for (; k < order.size() && points[order[k]].tau == tau; ++k) {
      result[order[k]] = cur[static_cast<std::size_t>(points[order[k]].x - cur_lo)];
    }
    if (tau == top) break;
    const SiteRange w = cone_window(points, s, tau + 1);
    next.resize(static_cast<std::size_t>(w.hi - w.lo + 1));
    rap_step(env, s, tau + 1, cur_lo, cur.data(), w.lo, next.data(), next.size(), scratch);
    cur.swap(next);
    cur_lo = w.lo;
  }
  return result;
}

}  // namespace rap
