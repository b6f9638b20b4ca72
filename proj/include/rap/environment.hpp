#pragma once

// The i.i.d. space-time environment omega = (u_tau(x))_{(x, tau)} as a pure
// function of (seed, x, tau). Nothing is materialized; rows are generated on
// demand and are bit-identical however and wherever they are requested.
//
// The mapping from (seed, x, tau) to a vector depends on the law: changing M
// or the law variant changes the stream, so seeds are not portable across laws.

#include <cstdint>
#include <span>
#include <vector>

#include "rap/weight_law.hpp"

namespace rap {

// One time level of the environment over sites [x_lo, x_lo + sites).
struct EnvRow {
  std::int64_t tau = 0;
  std::int64_t x_lo = 0;
  int range = 0;
  std::vector<double> values;  // sites * (2M+1), site-major

  std::size_t sites() const noexcept { return values.size() / static_cast<std::size_t>(2 * range + 1); }
  std::span<const double> at(std::int64_t x) const noexcept {
    const auto w = static_cast<std::size_t>(2 * range + 1);
    return {values.data() + static_cast<std::size_t>(x - x_lo) * w, w};
  }
  double u(std::int64_t x, int j) const noexcept { return at(x)[static_cast<std::size_t>(j + range)]; }
};

class Environment {
 public:
  Environment(WeightLaw law, std::uint64_t seed);

  const WeightLaw& law() const noexcept { return law_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int range() const noexcept { return law_.range(); }

  std::vector<double> vector_at(std::int64_t x, std::int64_t tau) const;
  void vector_at(std::int64_t x, std::int64_t tau, std::span<double> out) const;

  // Requires x_lo <= x_hi.
  EnvRow row(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi) const;

  // Writes (x_hi - x_lo + 1) * (2M+1) values, site-major, into `out`.
  void fill_row(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi, std::vector<double>& out) const;

  // Two-point laws only: writes u_tau(x, -1) for x in [x_lo, x_hi].
  void fill_left_weights(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi, std::vector<double>& out) const;

  bool two_point() const noexcept { return two_point_; }

  // Raw access for fused kernels: the Beta(1, 1) left weight at (x, tau) is
  // uniform_left(row_key(tau), x), identical to vector_at(x, tau)[0].
  std::uint64_t row_key(std::int64_t tau) const noexcept { return rap::row_key(key_, tau); }
  static double uniform_left(std::uint64_t rk, std::int64_t x) noexcept {
    return to_open_unit(mix64(cell_key(rk, x) + kGoldenGamma));
  }

 private:
  WeightLaw law_;
  std::uint64_t seed_;
  std::uint64_t key_;
  bool two_point_;
};

}  // namespace rap
