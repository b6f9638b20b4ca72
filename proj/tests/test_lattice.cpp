#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rap/errors.hpp"
#include "rap/lattice.hpp"
#include "rap/parallel.hpp"

using namespace rap;

namespace {

const WeightLaw& pick(int k) {
  static const std::vector<WeightLaw> laws = {
      WeightLaw::two_point_beta(2, 1), WeightLaw::two_point_beta(5, 2), WeightLaw::dirichlet({1.0, 0.5, 2.0}),
      WeightLaw::dirichlet({0.0, 1.0, 1.0, 0.0, 3.0}), WeightLaw::deterministic({0.5, 0.5, 0.0})};
  return laws[static_cast<std::size_t>(k)];
}

}  // namespace

TEST_CASE("lattice floor") {
  CHECK(lattice_floor(-1.5) == -2);
  CHECK(lattice_floor(2.9999999999999996) == 3);
  CHECK(lattice_floor(2.5) == 2);
  CHECK(lattice_floor(-0.0) == 0);
  CHECK(lattice_floor(0.1 * 3 * 10) == 3);
  CHECK(lattice_floor(1e6 + 0.5) == 1000000);
}

TEST_CASE("rap step matches the pointwise stencil") {
  for (int k = 0; k < 5; ++k) {
    const Environment env(pick(k), 31);
    const StepSupport s = step_support(env.law());
    const std::int64_t in_lo = -10;
    std::vector<double> in(30);
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(0.7 * static_cast<double>(i)) + 0.1 * static_cast<double>(i);
    const std::int64_t out_lo = in_lo - s.min_step;
    const std::size_t out_n = in.size() - static_cast<std::size_t>(s.max_step - s.min_step);
    std::vector<double> out(out_n);
    LatticeScratch scratch;
    rap_step(env, s, 3, in_lo, in.data(), out_lo, out.data(), out_n, scratch);
    const int M = env.range();
    for (std::size_t i = 0; i < out_n; ++i) {
      const std::int64_t x = out_lo + static_cast<std::int64_t>(i);
      const auto u = env.vector_at(x, 3);
      double ref = 0.0;
      for (int j = s.min_step; j <= s.max_step; ++j) ref += u[static_cast<std::size_t>(j + M)] * in[static_cast<std::size_t>(x + j - in_lo)];
      CHECK(out[i] == doctest::Approx(ref).epsilon(1e-14));
    }
  }
}

TEST_CASE("walk step transports mass with the row kernel") {
  for (int k = 0; k < 5; ++k) {
    const Environment env(pick(k), 8);
    const StepSupport s = step_support(env.law());
    const std::int64_t in_lo = 4;
    const std::vector<double> in = {0.1, 0.0, 0.3, 0.25, 0.35};
    std::vector<double> out(in.size() + static_cast<std::size_t>(s.max_step - s.min_step), -1.0);
    LatticeScratch scratch;
    walk_step(env, s, -2, in_lo, in.data(), in.size(), out.data(), scratch);
    std::vector<double> ref(out.size(), 0.0);
    const int M = env.range();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const auto u = env.vector_at(in_lo + static_cast<std::int64_t>(i), -2);
      for (int j = s.min_step; j <= s.max_step; ++j) ref[i + static_cast<std::size_t>(j - s.min_step)] += in[i] * u[static_cast<std::size_t>(j + M)];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-15));
      total += out[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("cone windows") {
  const StepSupport s{-1, 0};
  const std::vector<SpaceTimePoint> pts = {{0, 10}, {5, 4}};
  auto w = cone_window(pts, s, 4);
  CHECK(w.lo == -6);
  CHECK(w.hi == 5);
  w = cone_window(pts, s, 0);
  CHECK(w.lo == -10);
  CHECK(w.hi == 5);
  w = cone_window(pts, s, 7);
  CHECK(w.lo == -3);
  CHECK(w.hi == 0);
  CHECK(cone_window(pts, s, 11).lo > cone_window(pts, s, 11).hi);
}

TEST_CASE("evolution to points") {
  const Environment env(WeightLaw::deterministic({0.5, 0.5, 0.0}), 1);
  std::vector<double> h0(41);
  for (int i = 0; i < 41; ++i) h0[static_cast<std::size_t>(i)] = i - 20;
  const auto v = evolve_to_points(env, -20, h0, {{3, 0}, {0, 6}, {2, 6}, {-1, 19}});
  CHECK(v[0] == 3.0);
  CHECK(v[1] == -3.0);
  CHECK(v[2] == -1.0);
  CHECK(v[3] == -10.5);
  CHECK_THROWS_AS(evolve_to_points(env, -20, h0, {{0, 21}}), WindowExhausted);
  CHECK_THROWS_AS(evolve_to_points(env, -20, h0, {{0, -1}}), DomainError);
}

TEST_CASE("parallel_for fills every slot and reports the first failure") {
  for (int threads : {1, 3, 8}) {
    std::vector<int> slots(1000, 0);
    parallel_for(slots.size(), threads, [&](std::size_t i) { slots[i] = static_cast<int>(i * i % 97); });
    for (std::size_t i = 0; i < slots.size(); ++i) CHECK(slots[i] == static_cast<int>(i * i % 97));
  }
  std::atomic<int> calls{0};
  try {
    parallel_for(100, 1, [&](std::size_t i) {
      ++calls;
      if (i == 7 || i == 40) throw std::runtime_error(std::to_string(i));
    });
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "7");
  }
  CHECK(calls.load() == 8);
  CHECK(resolve_threads(0) >= 1);
  CHECK(resolve_threads(5) == 5);
}
