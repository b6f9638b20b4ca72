#include "rap/rap_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rap/errors.hpp"
#include "rap/parallel.hpp"
#include "rap/stats.hpp"

namespace rap {

InitProfile InitProfile::gaussian(std::function<double(double)> rho, std::function<double(double)> v,
                                  std::string name) {
  InitProfile p;
  p.family = ProfileFamily::Gaussian;
  p.rho = std::move(rho);
  p.v = std::move(v);
  p.name = std::move(name);
  return p;
}

InitProfile InitProfile::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw ProfileError("gamma profile needs positive shape and rate");
  InitProfile p;
  p.family = ProfileFamily::Gamma;
  p.shape = shape;
  p.rate = rate;
  const double mean = shape / rate, var = shape / (rate * rate);
  p.rho = [mean](double) { return mean; };
  p.v = [var](double) { return var; };
  p.name = "gamma";
  return p;
}

InitProfile InitProfile::deterministic(std::function<double(double)> rho, std::string name) {
  InitProfile p;
  p.family = ProfileFamily::Deterministic;
  p.rho = std::move(rho);
  p.v = [](double) { return 0.0; };
  p.name = std::move(name);
  return p;
}

InitProfile InitProfile::preset(const std::string& name, double a, double c, double var) {
  if (var < 0.0) throw ProfileError("preset " + name + ": negative variance");
  std::function<double(double)> rho;
  if (name == "constant") {
    rho = [a](double) { return a; };
  } else if (name == "linear") {
    rho = [a, c](double x) { return a + c * x; };
  } else if (name == "quadratic") {
    rho = [](double x) { return x * x; };
  } else if (name == "gamma") {
    return gamma(a, c);
  } else {
    throw ProfileError("unknown profile preset '" + name + "'");
  }
  if (var == 0.0) return deterministic(std::move(rho), name);
  return gaussian(std::move(rho), [var](double) { return var; }, name);
}

double HeightWindow::at(std::int64_t x) const {
  if (x < base || x > x_hi()) {
    throw DomainError("height window [" + std::to_string(base) + ", " + std::to_string(x_hi()) +
                      "] does not contain " + std::to_string(x));
  }
  return heights[static_cast<std::size_t>(x - base)];
}

std::vector<double> HeightWindow::increments() const {
  std::vector<double> eta;
  for (std::size_t i = 1; i < heights.size(); ++i) eta.push_back(heights[i] - heights[i - 1]);
  return eta;
}

namespace {

double draw_increment(const InitProfile& p, long n, std::int64_t i, std::uint64_t key) {
  const double x = static_cast<double>(i) / static_cast<double>(n);
  SiteRng rng(cell_key(key, i));
  switch (p.family) {
    case ProfileFamily::Deterministic:
      return p.rho(x);
    case ProfileFamily::Gamma: {
      std::gamma_distribution<double> g(p.shape, 1.0 / p.rate);
      return g(rng);
    }
    case ProfileFamily::Gaussian: {
      const double v = p.v(x);
      if (!(v >= 0.0)) throw ProfileError("variance profile is " + std::to_string(v) + " at site " + std::to_string(i));
      std::normal_distribution<double> z(0.0, 1.0);
      return p.rho(x) + std::sqrt(v) * z(rng);
    }
  }
  return 0.0;
}

}  // namespace

HeightWindow init_heights(const InitProfile& profile, long n, std::int64_t lo, std::int64_t hi, std::uint64_t seed) {
  if (n < 1) throw DomainError("init_heights: n must be positive");
  if (lo > hi) throw DomainError("init_heights: empty window");
  const std::uint64_t key = domain_key(seed, kInitialDataDomain);
  const std::int64_t L = std::min<std::int64_t>(lo, 0);
  const std::int64_t H = std::max<std::int64_t>(hi, 0);
  std::vector<double> sigma(static_cast<std::size_t>(H - L + 1), 0.0);
  for (std::int64_t i = 1; i <= H; ++i) {
    const auto k = static_cast<std::size_t>(i - L);
    sigma[k] = sigma[k - 1] + draw_increment(profile, n, i, key);
  }
  for (std::int64_t i = 0; i > L; --i) {
    const auto k = static_cast<std::size_t>(i - L);
    sigma[k - 1] = sigma[k] - draw_increment(profile, n, i, key);
  }
  HeightWindow h;
  h.base = lo;
  h.tau = 0;
  h.heights.assign(sigma.begin() + (lo - L), sigma.begin() + (hi - L + 1));
  return h;
}

HeightWindow evolve(const HeightWindow& heights, const Environment& env, long steps, std::optional<SiteRange> keep) {
  if (steps < 0) throw DomainError("evolve: negative step count");
  const std::int64_t M = env.range();
  const StepSupport s = step_support(env.law());
  const auto size = static_cast<std::int64_t>(heights.heights.size());
  if (size - 2 * M * steps < 1) {
    throw WindowExhausted("evolve: window of " + std::to_string(size) + " sites cannot take " + std::to_string(steps) +
                          " steps");
  }
  HeightWindow cur = heights;
  HeightWindow next;
  LatticeScratch scratch;
  for (long k = 0; k < steps; ++k) {
    next.base = cur.base + M;
    next.tau = cur.tau + 1;
    next.heights.resize(cur.heights.size() - static_cast<std::size_t>(2 * M));
    rap_step(env, s, next.tau, cur.base, cur.heights.data(), next.base, next.heights.data(), next.heights.size(), scratch);
    std::swap(cur, next);
  }
  if (keep && keep->lo <= keep->hi && (keep->lo < cur.base || keep->hi > cur.x_hi())) {
    throw WindowExhausted("evolve: surviving window [" + std::to_string(cur.base) + ", " + std::to_string(cur.x_hi()) +
                          "] misses [" + std::to_string(keep->lo) + ", " + std::to_string(keep->hi) + "]");
  }
  return cur;
}

FluctuationField z_n(const ObservationGrid& obs, const InitProfile& profile, const Environment& env,
                     std::uint64_t init_seed, bool split) {
  const long n = obs.n;
  if (n < 1) throw DomainError("z_n: n must be positive");
  const double b = -env.law().drift().V;
  const double rn = std::sqrt(static_cast<double>(n));
  const double scale = std::pow(static_cast<double>(n), -0.25);
  std::vector<SpaceTimePoint> pts;
  for (const auto& g : obs.points) {
    if (!(g.t >= 0.0)) throw DomainError("z_n: observation time must be nonnegative");
    const std::int64_t x = lattice_floor(static_cast<double>(n) * obs.ybar) + lattice_floor(g.r * rn);
    const std::int64_t tau = lattice_floor(static_cast<double>(n) * g.t);
    pts.push_back({x + lattice_floor(static_cast<double>(n) * g.t * b), tau});
    pts.push_back({x, 0});
  }
  FluctuationField f;
  if (pts.empty()) return f;
  const SiteRange w = cone_window(pts, step_support(env.law()), 0);
  const HeightWindow h0 = init_heights(profile, n, w.lo, w.hi, init_seed);
  const auto vals = evolve_to_points(env, h0.base, h0.heights, pts);
  f.lo0 = h0.base;
  f.initial = h0.heights;

  for (std::size_t k = 0; k < obs.points.size(); ++k) {
    const auto& g = obs.points[k];
    FluctuationPoint p;
    p.sigma_end = vals[2 * k];
    p.sigma_start = vals[2 * k + 1];
    p.z = {n, g.t, g.r, scale * (p.sigma_end - p.sigma_start)};
    if (split) {
      const SpaceTimePoint end = pts[2 * k];
      const std::int64_t x = pts[2 * k + 1].x;
      const auto d = propagate(env, end.x, end.tau, static_cast<long>(end.tau), Direction::Backward);
      const std::int64_t lo = std::min(x, d.x_lo) + 1;
      const std::int64_t hi = std::max(x, d.x_hi());
      // w_i = 1{i > x} P(X >= i) - 1{i <= x} P(X < i).
      double below = 0.0;
      for (std::int64_t y = d.x_lo; y < lo; ++y) below += d.at(y);
      double Y = 0.0, H = 0.0;
      for (std::int64_t i = lo; i <= hi; ++i) {
        const double w_i = i > x ? 1.0 - below : -below;
        const double eta = h0.at(i) - h0.at(i - 1);
        const double rho = profile.rho(static_cast<double>(i) / static_cast<double>(n));
        Y += (eta - rho) * w_i;
        H += rho * w_i;
        below += d.at(i);
      }
      p.Y = scale * Y;
      p.H = scale * H;
      p.H_mean_form = scale * profile.rho(obs.ybar) * (d.mean() - static_cast<double>(x));
    }
    f.points.push_back(p);
  }
  return f;
}

IncrementWindow increment_step_two_point(const IncrementWindow& eta, const Environment& env) {
  if (!env.two_point()) throw UnsupportedLaw("increment_step_two_point needs a two-point law");
  if (eta.values.size() < 2) throw WindowExhausted("increment step: window too small");
  std::vector<double> u;
  const std::int64_t hi = eta.base + static_cast<std::int64_t>(eta.values.size()) - 1;
  env.fill_left_weights(eta.tau + 1, eta.base, hi, u);
  IncrementWindow out;
  out.base = eta.base + 1;
  out.tau = eta.tau + 1;
  out.values.resize(eta.values.size() - 1);
  for (std::size_t k = 1; k < eta.values.size(); ++k) {
    out.values[k - 1] = (1.0 - u[k]) * eta.values[k] + u[k - 1] * eta.values[k - 1];
  }
  return out;
}

InvarianceReport invariance_test(int m, int j, double lambda, int n_sites, long T, long samples,
                                 std::uint64_t base_seed, int threads) {
  if (!(m > j && j >= 1)) throw DomainError("invariance_test: need m > j >= 1");
  if (!(lambda > 0.0)) throw DomainError("invariance_test: lambda must be positive");
  if (n_sites < 2) throw DomainError("invariance_test: ring needs at least 2 sites");
  if (T < 0) throw DomainError("invariance_test: negative T");
  const WeightLaw law = WeightLaw::two_point_beta(m, j);
  InvarianceReport rep;
  rep.m = m;
  rep.j = j;
  rep.lambda = lambda;
  rep.samples = samples;
  rep.steps = T;
  rep.values.assign(static_cast<std::size_t>(samples), 0.0);
  const auto L = static_cast<std::size_t>(n_sites);
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t s) {
    const std::uint64_t seed = replicate_seed(base_seed, s);
    const Environment env(law, seed);
    const std::uint64_t key = domain_key(seed, kInitialDataDomain);
    std::vector<double> eta(L), next(L), u;
    for (std::size_t k = 0; k < L; ++k) {
      SiteRng rng(cell_key(key, static_cast<std::int64_t>(k)));
      std::gamma_distribution<double> g(m, 1.0 / lambda);
      eta[k] = g(rng);
    }
    for (long tau = 1; tau <= T; ++tau) {
      env.fill_left_weights(tau, 0, n_sites - 1, u);
      next[0] = (1.0 - u[0]) * eta[0] + u[L - 1] * eta[L - 1];
      for (std::size_t k = 1; k < L; ++k) next[k] = (1.0 - u[k]) * eta[k] + u[k - 1] * eta[k - 1];
      eta.swap(next);
    }
    rep.values[s] = eta[0];
  });
  const auto ks = ks_statistic(rep.values, [&](double x) { return gamma_cdf(x, m, lambda); });
  rep.ks = ks.distance;
  rep.ks_critical_1pct = ks.critical_at(0.01);
  const auto mom = sample_moments(rep.values);
  rep.mean = mom.mean;
  rep.mean_se = mom.mean_se;
  rep.variance = mom.variance;
  rep.variance_se = mom.variance_se;
  rep.mean_expected = m / lambda;
  rep.variance_expected = m / (lambda * lambda);
  return rep;
}

}  // namespace rap
