#include "rap/rwre.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <variant>

#include "rap/errors.hpp"
#include "rap/green.hpp"
#include "rap/kernels.hpp"
#include "rap/parallel.hpp"

namespace rap {

double QuenchedDistribution::at(std::int64_t x) const noexcept {
  if (x < x_lo || x > x_hi()) return 0.0;
  return pmf[static_cast<std::size_t>(x - x_lo)];
}

double QuenchedDistribution::mass() const noexcept {
  // Kahan sum: the mass check is what catches drift, so it must not add its own.
  double s = 0.0, c = 0.0;
  for (double p : pmf) {
    const double y = p - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double QuenchedDistribution::mean() const noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) acc += pmf[k] * static_cast<double>(x_lo + static_cast<std::int64_t>(k) - start);
  return static_cast<double>(start) + acc;
}

namespace {

class Walker {
 public:
  Walker(const Environment& env, std::int64_t i, std::int64_t tau, Direction dir)
      : env_(env), s_(step_support(env.law())), i_(i), tau_(tau), dir_(dir), lo_(i), cur_{1.0} {}

  void step() {
    const std::int64_t row = dir_ == Direction::Backward ? tau_ - k_ : tau_ + k_;
    next_.resize(cur_.size() + static_cast<std::size_t>(s_.max_step - s_.min_step));
    walk_step(env_, s_, row, lo_, cur_.data(), cur_.size(), next_.data(), scratch_);
    cur_.swap(next_);
    lo_ += s_.min_step;
    ++k_;
  }

  double mean() const noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < cur_.size(); ++k) acc += cur_[k] * static_cast<double>(lo_ + static_cast<std::int64_t>(k) - i_);
    return static_cast<double>(i_) + acc;
  }

  long steps() const noexcept { return k_; }
  std::int64_t lo() const noexcept { return lo_; }
  std::vector<double>& pmf() noexcept { return cur_; }

 private:
  const Environment& env_;
  StepSupport s_;
  std::int64_t i_, tau_;
  Direction dir_;
  long k_ = 0;
  std::int64_t lo_;
  std::vector<double> cur_, next_;
  LatticeScratch scratch_;
};

void check_levels(std::int64_t tau, long k, Direction dir) {
  if (k < 0) throw DomainError("propagate: negative step count");
  if (dir == Direction::Backward && k > tau) {
    throw TimeUnderflow("propagate: " + std::to_string(k) + " backward steps from level " + std::to_string(tau) +
                        " pass level 0");
  }
}

double quarter_root(long n) { return std::pow(static_cast<double>(n), -0.25); }

void check_scale(long n, double t) {
  if (n < 1) throw DomainError("scaled process: n must be positive");
  if (!(t >= 0.0)) throw DomainError("scaled process: t must be nonnegative");
}

}  // namespace

QuenchedDistribution propagate(const Environment& env, std::int64_t i, std::int64_t tau, long k, Direction dir) {
  check_levels(tau, k, dir);
  Walker w(env, i, tau, dir);
  while (w.steps() < k) w.step();
  QuenchedDistribution d;
  d.start = i;
  d.tau = tau;
  d.steps = k;
  d.direction = dir;
  d.x_lo = w.lo();
  d.pmf = std::move(w.pmf());
  return d;
}

std::vector<double> quenched_means(const Environment& env, std::int64_t i, std::int64_t tau,
                                   const std::vector<long>& steps, Direction dir) {
  std::vector<double> out(steps.size(), 0.0);
  if (steps.empty()) return out;
  const long top = *std::max_element(steps.begin(), steps.end());
  check_levels(tau, top, dir);
  std::vector<std::size_t> order(steps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });
  Walker w(env, i, tau, dir);
  for (std::size_t idx : order) {
    if (steps[idx] < 0) throw DomainError("quenched_means: negative step count");
    while (w.steps() < steps[idx]) w.step();
    out[idx] = w.mean();
  }
  return out;
}

std::vector<double> backward_means_to_zero(const Environment& env, const std::vector<SpaceTimePoint>& points) {
  if (points.empty()) return {};
  const StepSupport s = step_support(env.law());
  const SiteRange w = cone_window(points, s, 0);
  const std::int64_t ref = points.front().x;
  std::vector<double> h0(static_cast<std::size_t>(w.hi - w.lo + 1));
  for (std::size_t k = 0; k < h0.size(); ++k) h0[k] = static_cast<double>(w.lo + static_cast<std::int64_t>(k) - ref);
  auto vals = evolve_to_points(env, w.lo, h0, points);
  for (auto& v : vals) v += static_cast<double>(ref);
  return vals;
}

ScaledProcessPoint y_n(const Environment& env, long n, double t, double r, double ybar) {
  check_scale(n, t);
  const double b = -env.law().drift().V;
  const std::int64_t base = lattice_floor(static_cast<double>(n) * ybar) + lattice_floor(r * std::sqrt(static_cast<double>(n)));
  const std::int64_t tau = lattice_floor(static_cast<double>(n) * t);
  const std::int64_t x = base + lattice_floor(static_cast<double>(n) * t * b);
  const double mean = quenched_means(env, x, tau, {static_cast<long>(tau)}, Direction::Backward).front();
  return {n, t, r, quarter_root(n) * (mean - static_cast<double>(base))};
}

ScaledProcessPoint a_n(const Environment& env, long n, double t, double r) {
  check_scale(n, t);
  const double V = env.law().drift().V;
  const std::int64_t x = lattice_floor(r * std::sqrt(static_cast<double>(n)));
  const std::int64_t k = lattice_floor(static_cast<double>(n) * t);
  const double mean = quenched_means(env, x, 0, {static_cast<long>(k)}, Direction::Forward).front();
  return {n, t, r, quarter_root(n) * (mean - static_cast<double>(x) - static_cast<double>(k) * V)};
}

std::vector<ScaledProcessPoint> y_n_grid(const Environment& env, long n, const std::vector<GridPoint>& grid,
                                         double ybar) {
  const double b = -env.law().drift().V;
  std::vector<SpaceTimePoint> pts;
  std::vector<std::int64_t> bases;
  for (const auto& g : grid) {
    check_scale(n, g.t);
    const std::int64_t base = lattice_floor(static_cast<double>(n) * ybar) + lattice_floor(g.r * std::sqrt(static_cast<double>(n)));
    const std::int64_t tau = lattice_floor(static_cast<double>(n) * g.t);
    pts.push_back({base + lattice_floor(static_cast<double>(n) * g.t * b), tau});
    bases.push_back(base);
  }
  const auto means = backward_means_to_zero(env, pts);
  std::vector<ScaledProcessPoint> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.push_back({n, grid[k].t, grid[k].r, quarter_root(n) * (means[k] - static_cast<double>(bases[k]))});
  }
  return out;
}

std::vector<ScaledProcessPoint> a_n_grid(const Environment& env, long n, const std::vector<GridPoint>& grid) {
  const double V = env.law().drift().V;
  std::vector<ScaledProcessPoint> out(grid.size());
  // One forward propagation per distinct starting site.
  std::map<std::int64_t, std::vector<std::size_t>> by_start;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    check_scale(n, grid[k].t);
    by_start[lattice_floor(grid[k].r * std::sqrt(static_cast<double>(n)))].push_back(k);
  }
  for (const auto& [x, idx] : by_start) {
    std::vector<long> steps;
    for (std::size_t k : idx) steps.push_back(static_cast<long>(lattice_floor(static_cast<double>(n) * grid[k].t)));
    const auto means = quenched_means(env, x, 0, steps, Direction::Forward);
    for (std::size_t m = 0; m < idx.size(); ++m) {
      const auto& g = grid[idx[m]];
      out[idx[m]] = {n, g.t, g.r,
                     quarter_root(n) * (means[m] - static_cast<double>(x) - static_cast<double>(steps[m]) * V)};
    }
  }
  return out;
}

namespace {

// Exact expectation over every environment configuration in the joint light
// cone of walks started at `starts` (all at level n) of g(quenched means).
class Enumerator {
 public:
  Enumerator(const WeightLaw& law, std::vector<std::int64_t> starts, long n)
      : starts_(std::move(starts)), n_(n), M_(law.range()) {
    const auto* mix = std::get_if<FiniteMixture>(&law.variant());
    if (mix == nullptr) throw UnsupportedLaw("exhaustive mode needs a finite mixture law");
    if (n > 6) throw CapacityError("exhaustive mode: n = " + std::to_string(n) + " exceeds 6");
    for (const auto& c : mix->components) {
      if (c.weight > 0.0) {
        comps_.push_back(c.p);
        weights_.push_back(c.weight);
      }
    }
    s_ = step_support(law);
    std::vector<SpaceTimePoint> pts;
    for (auto x : starts_) pts.push_back({x, n});
    double bits = 0.0;
    for (long tau = n; tau >= 1; --tau) {
      const SiteRange w = cone_window(pts, s_, tau);
      bits += static_cast<double>(w.hi - w.lo + 1) * std::log2(static_cast<double>(comps_.size()));
    }
    if (bits > kLeafBits) {
      throw CapacityError("exhaustive mode: about 2^" + std::to_string(static_cast<int>(bits)) +
                          " configurations, budget 2^" + std::to_string(static_cast<int>(kLeafBits)));
    }
  }

  template <class G>
  double expectation(G&& g) {
    const std::int64_t lo = *std::min_element(starts_.begin(), starts_.end());
    const std::int64_t hi = *std::max_element(starts_.begin(), starts_.end());
    const std::size_t len = static_cast<std::size_t>(hi - lo + 1);
    std::vector<std::vector<double>> pmfs(starts_.size(), std::vector<double>(len, 0.0));
    for (std::size_t w = 0; w < starts_.size(); ++w) pmfs[w][static_cast<std::size_t>(starts_[w] - lo)] = 1.0;
    acc_ = 0.0L;
    means_.assign(starts_.size(), 0.0);
    recurse(n_, lo, pmfs, 1.0L, g);
    return static_cast<double>(acc_);
  }

 private:
  static constexpr double kLeafBits = 25.0;

  template <class G>
  void recurse(long tau, std::int64_t lo, const std::vector<std::vector<double>>& pmfs, long double prob, G& g) {
    const std::size_t len = pmfs.front().size();
    if (tau == 0) {
      for (std::size_t w = 0; w < pmfs.size(); ++w) {
        long double m = 0.0L;
        for (std::size_t k = 0; k < len; ++k) m += static_cast<long double>(pmfs[w][k]) * static_cast<long double>(lo + static_cast<std::int64_t>(k));
        means_[w] = static_cast<double>(m);
      }
      acc_ += prob * static_cast<long double>(g(means_));
      return;
    }
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < len; ++k) {
      for (const auto& p : pmfs) {
        if (p[k] != 0.0) {
          active.push_back(k);
          break;
        }
      }
    }
    const std::size_t span = static_cast<std::size_t>(s_.max_step - s_.min_step);
    std::vector<std::vector<double>> next(pmfs.size(), std::vector<double>(len + span, 0.0));
    std::vector<std::size_t> choice(active.size(), 0);
    const std::size_t K = comps_.size();
    for (;;) {
      long double pr = prob;
      for (auto& v : next) std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const auto& u = comps_[choice[a]];
        pr *= static_cast<long double>(weights_[choice[a]]);
        const std::size_t k = active[a];
        for (std::size_t w = 0; w < pmfs.size(); ++w) {
          const double m = pmfs[w][k];
          if (m == 0.0) continue;
          for (int j = s_.min_step; j <= s_.max_step; ++j) {
            next[w][k + static_cast<std::size_t>(j - s_.min_step)] += m * u[static_cast<std::size_t>(j + M_)];
          }
        }
      }
      recurse(tau - 1, lo + s_.min_step, next, pr, g);
      std::size_t a = 0;
      while (a < choice.size() && ++choice[a] == K) choice[a++] = 0;
      if (a == choice.size()) break;
    }
  }

  std::vector<std::int64_t> starts_;
  long n_;
  int M_;
  StepSupport s_;
  std::vector<ProbVector> comps_;
  std::vector<double> weights_;
  std::vector<double> means_;
  long double acc_ = 0.0L;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

void check_replicates(long replicates) {
  if (replicates < 2) throw InsufficientReplicates("Monte Carlo mode needs at least 2 replicates");
}

}  // namespace

VarianceEstimate quenched_mean_variance(const WeightLaw& law, long n, long replicates, VarianceMode mode,
                                        std::uint64_t base_seed, int threads) {
  if (n < 0) throw DomainError("quenched_mean_variance: negative n");
  const double V = law.drift().V;
  if (mode == VarianceMode::Exhaustive) {
    if (n == 0) return {0, 0.0, 0.0, 0};
    Enumerator e(law, {0}, n);
    const double e2 = e.expectation([&](const std::vector<double>& m) {
      const double d = m[0] - static_cast<double>(n) * V;
      return d * d;
    });
    return {n, e2, 0.0, 0};
  }
  return quenched_mean_variance_scan(law, {n}, replicates, base_seed, threads).front();
}

std::vector<VarianceEstimate> quenched_mean_variance_scan(const WeightLaw& law, const std::vector<long>& ns,
                                                          long replicates, std::uint64_t base_seed, int threads) {
  check_replicates(replicates);
  const double V = law.drift().V;
  std::vector<SpaceTimePoint> pts;
  for (long n : ns) {
    if (n < 0) throw DomainError("quenched_mean_variance: negative n");
    pts.push_back({0, n});
  }
  const std::size_t R = static_cast<std::size_t>(replicates);
  std::vector<double> sq(R * ns.size());
  parallel_for(R, threads, [&](std::size_t rep) {
    const Environment env(law, replicate_seed(base_seed, rep));
    const auto means = backward_means_to_zero(env, pts);
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const double d = means[k] - static_cast<double>(ns[k]) * V;
      sq[rep * ns.size() + k] = d * d;
    }
  });
  std::vector<VarianceEstimate> out;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::vector<double> col(R);
    for (std::size_t rep = 0; rep < R; ++rep) col[rep] = sq[rep * ns.size() + k];
    const auto ms = mean_and_se(col);
    out.push_back({ns[k], ms.mean, ms.se, replicates});
  }
  return out;
}

DifferenceReport difference_variance_check(const WeightLaw& law, long n, std::int64_t x, std::int64_t y,
                                           long replicates, VarianceMode mode, std::uint64_t base_seed,
                                           int threads) {
  if (n < 1) throw DomainError("difference_variance_check: n must be positive");
  DifferenceReport rep;
  rep.n = n;
  rep.x = x;
  rep.y = y;
  const auto table = green_table(q_kernels(law), n - 1);
  rep.theory = 2.0 * law.drift().sigma_D2 * (table.at(0) - table.at(x - y));
  if (x == y) return rep;
  const double dx = static_cast<double>(x), dy = static_cast<double>(y);
  if (mode == VarianceMode::Exhaustive) {
    Enumerator e(law, {x, y}, n);
    rep.estimate = e.expectation([&](const std::vector<double>& m) {
      const double d = (m[0] - dx) - (m[1] - dy);
      return d * d;
    });
    return rep;
  }
  check_replicates(replicates);
  const std::size_t R = static_cast<std::size_t>(replicates);
  std::vector<double> sq(R);
  parallel_for(R, threads, [&](std::size_t r) {
    const Environment env(law, replicate_seed(base_seed, r));
    const auto m = backward_means_to_zero(env, {{x, n}, {y, n}});
    const double d = (m[0] - dx) - (m[1] - dy);
    sq[r] = d * d;
  });
  const auto ms = mean_and_se(sq);
  rep.estimate = ms.mean;
  rep.std_err = ms.se;
  rep.replicates = replicates;
  return rep;
}

double moderate_deviation_probe(const Environment& env, long n, double c, double gamma) {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw DomainError("moderate_deviation_probe: gamma must lie in (0, 1/2]");
  if (n < 1) throw DomainError("moderate_deviation_probe: n must be positive");
  const double V = env.law().drift().V;
  const StepSupport s = step_support(env.law());
  const double h = c * std::pow(static_cast<double>(n), 0.5 + gamma);
  if (h <= 0.0) return 1.0;
  // The centered walk gains at most max_step - V per step.
  if (h > static_cast<double>(n) * (s.max_step - V)) return 0.0;
  Walker w(env, 0, n, Direction::Backward);
  double absorbed = 0.0;
  for (long k = 1; k <= n; ++k) {
    w.step();
    const auto first = static_cast<std::int64_t>(std::ceil(h + V * static_cast<double>(k)));
    auto& p = w.pmf();
    for (std::int64_t x = std::max(first, w.lo()); x < w.lo() + static_cast<std::int64_t>(p.size()); ++x) {
      auto& m = p[static_cast<std::size_t>(x - w.lo())];
      absorbed += m;
      m = 0.0;
    }
  }
  return absorbed;
}

}  // namespace rap
