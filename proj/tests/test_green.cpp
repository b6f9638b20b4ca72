#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "rap/errors.hpp"
#include "rap/green.hpp"
#include "rap/oracles.hpp"

using namespace rap;

namespace {

// Dense long-double powers of the perturbed kernel on a window that contains
// the whole reachable set.
std::vector<long double> brute_green(const PerturbedWalk& w, int n, int L) {
  const int size = 2 * L + 1;
  std::vector<long double> P(static_cast<std::size_t>(size * size), 0.0L);
  for (int x = -L; x <= L; ++x)
    for (int y = -L; y <= L; ++y) P[(x + L) * size + (y + L)] = w.step(x, y);
  std::vector<long double> col(size, 0.0L), G(size, 0.0L);
  col[L] = 1.0L;
  for (int i = 0; i < size; ++i) G[i] = col[i];
  for (int k = 0; k < n; ++k) {
    std::vector<long double> next(size, 0.0L);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) next[i] += P[i * size + j] * col[j];
    col = next;
    for (int i = 0; i < size; ++i) G[i] += col[i];
  }
  return G;
}

}  // namespace

TEST_CASE("q kernels of the uniform two-point law") {
  const auto w = q_kernels(WeightLaw::two_point_beta(2, 1));
  CHECK(w.q(0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(w.q(1) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(w.q(-1) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(w.qbar(0) == 0.5);
  CHECK(w.qbar(1) == 0.25);
  CHECK(w.qbar(-1) == 0.25);
  CHECK(w.q(2) == 0.0);
  CHECK(w.reach() == 1);
}

TEST_CASE("kernel invariants") {
  for (const auto& law : {WeightLaw::dirichlet({0.5, 2.0, 0.0, 1.5, 0.7}), WeightLaw::two_point_beta(5, 2),
                          WeightLaw::mixture({{0.4, {0.5, 0.3, 0.2}}, {0.6, {0.1, 0.6, 0.3}}})}) {
    const auto w = q_kernels(law);
    double sq = 0.0, sb = 0.0;
    for (int y = -w.q.half_width; y <= w.q.half_width; ++y) {
      CHECK(w.q(y) == doctest::Approx(w.q(-y)).epsilon(1e-15));
      CHECK(w.qbar(y) == doctest::Approx(w.qbar(-y)).epsilon(1e-15));
      sq += w.q(y);
      sb += w.qbar(y);
    }
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sb == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w.qbar.variance() == doctest::Approx(2.0 * law.drift().sigma_a2).epsilon(1e-13));
  }
  const auto det = q_kernels(WeightLaw::deterministic({0.1, 0.6, 0.3}));
  CHECK(det.q.pmf == det.qbar.pmf);
}

TEST_CASE("small Green values") {
  const auto w = q_kernels(WeightLaw::two_point_beta(2, 1));
  const auto t1 = green_table(w, 1);
  CHECK(t1.at(0) == doctest::Approx(5.0 / 3).epsilon(1e-15));
  const auto t2 = green_table(w, 2);
  CHECK(t2.at(0) == doctest::Approx(79.0 / 36).epsilon(1e-15));
  CHECK(t2.diagonal(1) == doctest::Approx(5.0 / 3).epsilon(1e-15));
  CHECK(green_table(w, 0).at(0) == 1.0);
  CHECK(green_table(w, 0).at(1) == 0.0);
}

TEST_CASE("Green tables match dense matrix powers") {
  for (const auto& law : {WeightLaw::two_point_beta(2, 1), WeightLaw::dirichlet({0.5, 2.0, 0.0, 1.5, 0.7}),
                          WeightLaw::mixture({{0.4, {0.5, 0.3, 0.2}}, {0.6, {0.1, 0.6, 0.3}}})}) {
    const auto w = q_kernels(law);
    const int n = 12;
    const auto t = green_table(w, n, {5});
    const int L = n * w.reach() + 2;
    const auto G = brute_green(w, n, L);
    for (int x = -L; x <= L; ++x) CHECK(t.at(x) == doctest::Approx(static_cast<double>(G[x + L])).epsilon(1e-14));
    const auto G5 = brute_green(w, 5, L);
    for (int x = -L; x <= L; ++x) CHECK(t.at(5, x) == doctest::Approx(static_cast<double>(G5[x + L])).epsilon(1e-14));
    CHECK_THROWS_AS(t.at(6, 0), DomainError);
  }
}

TEST_CASE("Green monotonicity and the homogeneous case") {
  const auto w = q_kernels(WeightLaw::dirichlet({1, 1, 1}));
  const auto t = green_table(w, 200, {50, 100});
  for (int x = -20; x <= 20; ++x) {
    CHECK(t.at(50, x) <= t.at(100, x));
    CHECK(t.at(100, x) <= t.at(x));
  }
  for (long k = 1; k <= 200; ++k) CHECK(t.diagonal(k) >= t.diagonal(k - 1));

  // q = qbar: each f_k is a probability vector and G_n(0,0) dominates.
  const auto h = q_kernels(WeightLaw::deterministic({0.5, 0.5, 0.0}));
  const auto th = green_table(h, 64);
  double total = 0.0;
  for (int x = -128; x <= 128; ++x) {
    total += th.at(x);
    CHECK(th.at(x) <= th.at(0));
  }
  CHECK(total == doctest::Approx(65.0).epsilon(1e-13));
}

TEST_CASE("capacity guard") {
  const auto w = q_kernels(WeightLaw::two_point_beta(2, 1));
  CHECK_THROWS_AS(green_table(w, 1000, {}, 1e5), CapacityError);
}

TEST_CASE("potential kernel closed form and harmonicity") {
  const auto w = q_kernels(WeightLaw::two_point_beta(2, 1));
  const PotentialKernel a(w.qbar);
  CHECK(a.closed_form());
  CHECK(a(3) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(a(-3) == a(3));
  CHECK(a(0) == 0.0);
  CHECK(a.harmonic_residual(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(a.harmonic_residual(4)) < 1e-14);
  CHECK(potential_kernel(w.qbar, 3) == a(3));
}

TEST_CASE("potential kernel harmonic solve against the Fourier integral") {
  for (const auto& law : {WeightLaw::dirichlet({1, 1, 1}), WeightLaw::dirichlet({0.5, 2.0, 0.0, 1.5, 0.7}),
                          WeightLaw::mixture({{0.4, {0.5, 0.3, 0.2}}, {0.6, {0.1, 0.6, 0.3}}})}) {
    const auto w = q_kernels(law);
    const PotentialKernel a(w.qbar);
    CHECK_FALSE(a.closed_form());
    CHECK(a(0) == 0.0);
    for (int x : {1, 2, 3, 7, 20}) {
      CHECK_MESSAGE(std::abs(a(x) - oracle::potential_kernel_fourier(w.qbar, x)) < 1e-9, law.describe() << " x=" << x);
    }
    CHECK(std::abs(a.harmonic_residual(0) - 1.0) < 1e-10);
    for (int x : {1, 2, 5, 100, 255, 256, 257, 1000}) CHECK(std::abs(a.harmonic_residual(x)) < 1e-10);
  }
}

TEST_CASE("potential kernel by Green differences") {
  const auto w = q_kernels(WeightLaw::dirichlet({1, 1, 1}));
  const PotentialKernel a(w.qbar);
  // Green differences creep toward abar at rate 1/sqrt(n); tight tolerances are out of reach.
  CHECK_THROWS_AS(potential_kernel_by_green(w.qbar, 2, 4096), NoConvergence);
  try {
    potential_kernel_by_green(w.qbar, 2, 4096);
  } catch (const NoConvergence& e) {
    CHECK(e.last() < a(2));
    CHECK(a(2) - e.last() < 0.05);
    CHECK(e.last() > e.previous());
  }
  const double loose = potential_kernel_by_green(w.qbar, 2, 1 << 14, 5e-2);
  CHECK(std::abs(loose - a(2)) < 0.05);
  CHECK(potential_kernel_by_green(w.qbar, 0, 10) == 0.0);
}

TEST_CASE("beta from the potential kernel") {
  CHECK(beta_from_potential(WeightLaw::two_point_beta(2, 1)) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(beta_from_potential(WeightLaw::deterministic({0.5, 0.5, 0.0})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(beta_from_potential(WeightLaw::deterministic({0.2, 0.5, 0.3})) - 1.0) < 1e-12);
  for (const auto& law : {WeightLaw::dirichlet({1, 1, 1}), WeightLaw::dirichlet({0.5, 2.0, 0.0, 1.5, 0.7})}) {
    CHECK(std::abs(beta_from_potential(law) - beta_quadrature(law)) < 1e-9);
  }
}

TEST_CASE("Green asymptotics for the uniform two-point law") {
  const auto law = WeightLaw::two_point_beta(2, 1);
  const auto c = compute_constants(law);
  CHECK(green_limit(0.0, c) == doctest::Approx(3.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  const auto w = q_kernels(law);
  const auto rep = green_asymptotics_report(w, c, 10'000, {0.0, 0.5, 1.0});
  CHECK(rep.diag_limit == doctest::Approx(1.6925688).epsilon(1e-7));
  CHECK(std::abs(rep.rows[0].rel_err) < 0.03);
  CHECK(std::abs(rep.ratio_homogeneous - c.beta) < 2e-2);
  for (const auto& r : rep.rows) CHECK(std::abs(r.rel_err) < 0.05);

  const auto r2 = green_asymptotics_report(w, c, 100, {0.0});
  const auto r3 = green_asymptotics_report(w, c, 1000, {0.0});
  CHECK(std::isfinite(r2.max_increment));
  CHECK(std::abs(rep.max_increment - r3.max_increment) / r3.max_increment < 0.05);
}
