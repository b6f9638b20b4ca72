#include "rap/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "rap/errors.hpp"

namespace rap {

double GreenTable::at(std::int64_t x) const noexcept {
  const std::int64_t half = static_cast<std::int64_t>(n_) * reach_;
  if (x < -half || x > half) return 0.0;
  return final_[static_cast<std::size_t>(x + half)];
}

bool GreenTable::has_checkpoint(long k) const noexcept {
  return std::find(checkpoint_k_.begin(), checkpoint_k_.end(), k) != checkpoint_k_.end();
}

double GreenTable::at(long k, std::int64_t x) const {
  if (k == n_) return at(x);
  const auto it = std::find(checkpoint_k_.begin(), checkpoint_k_.end(), k);
  if (it == checkpoint_k_.end()) throw DomainError("green table: horizon " + std::to_string(k) + " not recorded");
  const auto& row = checkpoint_rows_[static_cast<std::size_t>(it - checkpoint_k_.begin())];
  const std::int64_t half = static_cast<std::int64_t>(k) * reach_;
  if (x < -half || x > half) return 0.0;
  return row[static_cast<std::size_t>(x + half)];
}

GreenTable green_table(const PerturbedWalk& w, long n, const std::vector<long>& checkpoints, double cell_budget) {
  if (n < 0) throw DomainError("green table: negative horizon");
  const int R = std::max(w.reach(), 1);
  const double cells = static_cast<double>(n) * static_cast<double>(n + 1) * R + static_cast<double>(n);
  if (cells > cell_budget) {
    throw CapacityError("green table: horizon " + std::to_string(n) + " needs " + std::to_string(cells) +
                        " cells, budget is " + std::to_string(cell_budget));
  }

  GreenTable t;
  t.n_ = n;
  t.reach_ = R;
  const std::int64_t half = static_cast<std::int64_t>(n) * R;
  const std::size_t size = static_cast<std::size_t>(2 * half + 1);
  // f buffers carry R cells of zero padding on either side.
  std::vector<double> f(size + 2 * static_cast<std::size_t>(R), 0.0);
  std::vector<double> g(f.size(), 0.0);
  std::vector<double> G(size, 0.0), comp(size, 0.0);
  const std::size_t origin = static_cast<std::size_t>(half + R);  // x = 0 in f/g
  f[origin] = 1.0;
  G[static_cast<std::size_t>(half)] = 1.0;

  std::vector<double> kbar(static_cast<std::size_t>(2 * R + 1)), k0(kbar.size());
  for (int d = -R; d <= R; ++d) {
    kbar[static_cast<std::size_t>(d + R)] = w.qbar(d);
    k0[static_cast<std::size_t>(d + R)] = w.q(d);
  }

  t.diag_.assign(static_cast<std::size_t>(n + 1), 0.0);
  t.diag_[0] = 1.0;
  auto record = [&](long k) {
    if (std::find(checkpoints.begin(), checkpoints.end(), k) == checkpoints.end() || k == n) return;
    const std::int64_t h = static_cast<std::int64_t>(k) * R;
    t.checkpoint_k_.push_back(k);
    t.checkpoint_rows_.emplace_back(G.begin() + (half - h), G.begin() + (half + h + 1));
  };
  record(0);

  for (long k = 0; k < n; ++k) {
    const std::int64_t h = static_cast<std::int64_t>(k + 1) * R;
    const std::size_t lo = origin - static_cast<std::size_t>(h);
    const std::size_t hi = origin + static_cast<std::size_t>(h);
    for (std::size_t i = lo; i <= hi; ++i) {
      const double* src = f.data() + i - R;
      double acc = 0.0;
      for (int d = 0; d <= 2 * R; ++d) acc += kbar[static_cast<std::size_t>(d)] * src[d];
      g[i] = acc;
    }
    {
      const double* src = f.data() + origin - R;
      double acc = 0.0;
      for (int d = 0; d <= 2 * R; ++d) acc += k0[static_cast<std::size_t>(d)] * src[d];
      g[origin] = acc;
    }
    // Neumaier-compensated accumulation of G over k.
    for (std::size_t i = lo; i <= hi; ++i) {
      const std::size_t j = i - static_cast<std::size_t>(R);
      const double v = g[i];
      const double s = G[j] + v;
      comp[j] += (std::abs(G[j]) >= std::abs(v)) ? (G[j] - s) + v : (v - s) + G[j];
      G[j] = s;
    }
    f.swap(g);
    t.diag_[static_cast<std::size_t>(k + 1)] = G[static_cast<std::size_t>(half)] + comp[static_cast<std::size_t>(half)];
    if (!checkpoints.empty()) {
      if (std::find(checkpoints.begin(), checkpoints.end(), k + 1) != checkpoints.end() && k + 1 != n) {
        const std::int64_t hh = h;
        t.checkpoint_k_.push_back(k + 1);
        auto& row = t.checkpoint_rows_.emplace_back(static_cast<std::size_t>(2 * hh + 1));
        for (std::int64_t x = -hh; x <= hh; ++x) {
          const auto j = static_cast<std::size_t>(x + half);
          row[static_cast<std::size_t>(x + hh)] = G[j] + comp[j];
        }
      }
    }
  }
  t.final_.resize(size);
  for (std::size_t j = 0; j < size; ++j) t.final_[j] = G[j] + comp[j];
  return t;
}

PotentialKernel::PotentialKernel(const LatticeKernel& qbar, int solve_radius)
    : qbar_(qbar), variance_(qbar.variance()) {
  if (!(variance_ > 0.0)) throw DomainError("potential kernel: degenerate kernel");
  const int R = qbar.reach();
  for (int d = 1; d <= qbar.half_width; ++d) {
    if (std::abs(qbar(d) - qbar(-d)) > 1e-14) throw DomainError("potential kernel: kernel is not symmetric");
  }
  if (R <= 1) {
    closed_form_ = true;
    return;
  }
  const int K = std::max(solve_radius, 8 * R);
  radius_ = K;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K, K);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(K);
  for (int x = 1; x <= K; ++x) {
    const int row = x - 1;
    A(row, row) -= 1.0;
    for (int d = -R; d <= R; ++d) {
      const double w = qbar(d);
      if (w == 0.0) continue;
      const int y = std::abs(x + d);
      if (y == 0) continue;
      if (y <= K) {
        A(row, y - 1) += w;
      } else {
        A(row, K - 1) += w;
        rhs(row) -= w * (y - K) / variance_;
      }
    }
  }
  const Eigen::VectorXd a = A.partialPivLu().solve(rhs);
  values_.assign(static_cast<std::size_t>(K + 1), 0.0);
  for (int x = 1; x <= K; ++x) values_[static_cast<std::size_t>(x)] = a(x - 1);
}

double PotentialKernel::operator()(std::int64_t x) const noexcept {
  const std::int64_t ax = x < 0 ? -x : x;
  if (closed_form_) return static_cast<double>(ax) / variance_;
  if (ax <= radius_) return values_[static_cast<std::size_t>(ax)];
  return values_.back() + static_cast<double>(ax - radius_) / variance_;
}

double PotentialKernel::harmonic_residual(std::int64_t x) const noexcept {
  double acc = 0.0;
  for (int d = -qbar_.half_width; d <= qbar_.half_width; ++d) acc += qbar_(d) * (*this)(x + d);
  return acc - (*this)(x);
}

double potential_kernel(const LatticeKernel& qbar, std::int64_t x) { return PotentialKernel(qbar)(x); }

double potential_kernel_by_green(const LatticeKernel& qbar, std::int64_t x, long n_max, double tol, long n_start) {
  if (x == 0) return 0.0;
  std::vector<long> horizons;
  for (long n = std::max(n_start, 1L); n <= n_max; n *= 2) horizons.push_back(n);
  if (horizons.size() < 3) throw NoConvergence("potential kernel: n_max too small for three horizons", n_max, 0, 0);
  const auto table = green_table(homogeneous(qbar), horizons.back(), horizons);
  std::vector<double> vals;
  for (long n : horizons) {
    vals.push_back(table.at(n, 0) - table.at(n, x));
    const std::size_t m = vals.size();
    if (m >= 3) {
      const double a = vals[m - 3], b = vals[m - 2], c = vals[m - 1];
      if (std::max({a, b, c}) - std::min({a, b, c}) < tol) return c;
    }
  }
  throw NoConvergence("potential kernel: Green differences did not settle", n_max, vals[vals.size() - 2], vals.back());
}

double beta_from_potential(const LatticeKernel& q, const std::function<double(std::int64_t)>& abar) {
  double acc = 0.0;
  for (int y = -q.half_width; y <= q.half_width; ++y) {
    if (q(y) != 0.0) acc += q(y) * abar(y);
  }
  return acc;
}

double beta_from_potential(const WeightLaw& law) {
  const auto w = q_kernels(law);
  const PotentialKernel a(w.qbar);
  return beta_from_potential(w.q, [&](std::int64_t x) { return a(x); });
}

double green_limit(double x, const Constants& c) {
  return psi(std::abs(x), 2.0 * c.sigma_a2) / (c.beta * c.sigma_a2);
}

GreenAsymptoticReport green_asymptotics_report(const PerturbedWalk& w, const Constants& c, long n,
                                               const std::vector<double>& x_points) {
  if (n < 1) throw DomainError("green report: n must be positive");
  const auto table = green_table(w, n);
  const auto bar = green_table(homogeneous(w.qbar), n);
  GreenAsymptoticReport rep;
  rep.n = n;
  const double rn = std::sqrt(static_cast<double>(n));
  for (double x : x_points) {
    GreenAsymptoticRow row;
    row.x = x;
    row.x_n = static_cast<std::int64_t>(std::llround(x * rn));
    row.green = table.at(row.x_n);
    row.scaled = row.green / rn;
    row.limit = green_limit(static_cast<double>(row.x_n) / rn, c);
    row.rel_err = row.limit != 0.0 ? (row.scaled - row.limit) / row.limit : 0.0;
    rep.rows.push_back(row);
  }
  rep.diag_limit = 1.0 / (c.beta * std::sqrt(std::numbers::pi * c.sigma_a2));
  rep.ratio_homogeneous = bar.at(0) / table.at(0);
  const auto& r = table.row();
  for (std::size_t i = 0; i + 1 < r.size(); ++i) rep.max_increment = std::max(rep.max_increment, std::abs(r[i] - r[i + 1]));
  return rep;
}

}  // namespace rap
