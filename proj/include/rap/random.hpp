#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of a 64-bit key, so environments and initial data can be queried
// in any order, from any thread, with bit-identical results.

#include <cstdint>
#include <limits>

namespace rap {

// SplitMix64 finalizer: a bijective avalanche mix of 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// Seed domains keep the environment stream and the initial-data stream of the
// same replicate seed apart.
inline constexpr std::uint64_t kEnvironmentDomain = 0x243f6a8885a308d3ULL;
inline constexpr std::uint64_t kInitialDataDomain = 0x13198a2e03707344ULL;
inline constexpr std::uint64_t kPathDomain = 0xa4093822299f31d0ULL;
inline constexpr std::uint64_t kReplicateDomain = 0x082efa98ec4e6c89ULL;

constexpr std::uint64_t domain_key(std::uint64_t seed, std::uint64_t domain) noexcept {
  return mix64(mix64(seed ^ domain) + kGoldenGamma);
}

// Seed of replicate `index` in a run with seed `base`. Hashed rather than
// added, so runs with nearby base seeds do not share replicates.
constexpr std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(domain_key(base, kReplicateDomain) + index * kGoldenGamma);
}

// Key of one lattice row (time level tau) under a domain key.
constexpr std::uint64_t row_key(std::uint64_t domain_key, std::int64_t tau) noexcept {
  return mix64(domain_key + static_cast<std::uint64_t>(tau) * kGoldenGamma);
}

// Key of one site in a row.
constexpr std::uint64_t cell_key(std::uint64_t row_key, std::int64_t x) noexcept {
  return mix64(row_key ^ (static_cast<std::uint64_t>(x) * 0xd1b54a32d192ed03ULL));
}

// Uniform double in the open interval (0, 1) from the top 53 bits.
constexpr double to_open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Small-state generator seeded from a site key (SplitMix64 stream). Satisfies
// UniformRandomBitGenerator so the standard distributions accept it.
class SiteRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SiteRng(std::uint64_t key) noexcept : state_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  constexpr double uniform() noexcept { return to_open_unit((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace rap
