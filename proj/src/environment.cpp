#include "rap/environment.hpp"

#include <variant>

#include "rap/errors.hpp"

namespace rap {

Environment::Environment(WeightLaw law, std::uint64_t seed)
    : law_(std::move(law)),
      seed_(seed),
      key_(domain_key(seed, kEnvironmentDomain)),
      two_point_(std::holds_alternative<TwoPointBeta>(law_.variant())) {}

void Environment::vector_at(std::int64_t x, std::int64_t tau, std::span<double> out) const {
  SiteRng rng(cell_key(row_key(tau), x));
  law_.sample(rng, out);
}

std::vector<double> Environment::vector_at(std::int64_t x, std::int64_t tau) const {
  std::vector<double> out(law_.width());
  vector_at(x, tau, out);
  return out;
}

EnvRow Environment::row(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi) const {
  if (x_lo > x_hi) throw DomainError("environment row: x_lo > x_hi");
  EnvRow r;
  r.tau = tau;
  r.x_lo = x_lo;
  r.range = range();
  fill_row(tau, x_lo, x_hi, r.values);
  return r;
}

void Environment::fill_row(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi, std::vector<double>& out) const {
  const auto w = law_.width();
  const auto sites = static_cast<std::size_t>(x_hi - x_lo + 1);
  out.resize(sites * w);
  const std::uint64_t rk = row_key(tau);
  if (two_point_) {
    for (std::size_t i = 0; i < sites; ++i) {
      SiteRng rng(cell_key(rk, x_lo + static_cast<std::int64_t>(i)));
      const double left = law_.sample_two_point_left(rng);
      out[i * w] = left;
      out[i * w + 1] = 1.0 - left;
      out[i * w + 2] = 0.0;
    }
    return;
  }
  for (std::size_t i = 0; i < sites; ++i) {
    SiteRng rng(cell_key(rk, x_lo + static_cast<std::int64_t>(i)));
    law_.sample(rng, std::span<double>(out.data() + i * w, w));
  }
}

void Environment::fill_left_weights(std::int64_t tau, std::int64_t x_lo, std::int64_t x_hi,
                                    std::vector<double>& out) const {
  if (!two_point_) throw UnsupportedLaw("fill_left_weights needs a two-point law");
  const auto sites = static_cast<std::size_t>(x_hi - x_lo + 1);
  out.resize(sites);
  const std::uint64_t rk = row_key(tau);
  double* dst = out.data();
  if (law_.is_uniform_two_point()) {
    // Same stream as SiteRng(cell_key(...)).uniform(), written flat so it vectorizes.
    for (std::size_t i = 0; i < sites; ++i) dst[i] = uniform_left(rk, x_lo + static_cast<std::int64_t>(i));
    return;
  }
  for (std::size_t i = 0; i < sites; ++i) {
    SiteRng rng(cell_key(rk, x_lo + static_cast<std::int64_t>(i)));
    dst[i] = law_.sample_two_point_left(rng);
  }
}

}  // namespace rap
