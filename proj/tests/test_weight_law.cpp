#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "rap/errors.hpp"
#include "rap/weight_law.hpp"

using namespace rap;

namespace {

std::vector<WeightLaw> sample_laws() {
  return {
      WeightLaw::deterministic({0.3, 0.5, 0.2}),
      WeightLaw::two_point_beta(2, 1),
      WeightLaw::two_point_beta(3, 1),
      WeightLaw::two_point_beta(5, 3),
      WeightLaw::dirichlet({1.0, 1.0, 1.0}),
      WeightLaw::dirichlet({0.5, 2.0, 0.0, 1.5, 0.7}),
      WeightLaw::mixture({{0.4, {0.5, 0.3, 0.2}}, {0.6, {0.1, 0.6, 0.3}}}),
  };
}

}  // namespace

TEST_CASE("two-point beta moments") {
  const auto law = WeightLaw::two_point_beta(2, 1);
  CHECK(law.range() == 1);
  const auto& p = law.annealed();
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[2] == 0.0);
  const auto& S = law.second_moments();
  CHECK(S(-1, -1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(S(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(S(-1, 0) == doctest::Approx(1.0 / 6).epsilon(1e-15));
  CHECK(S(0, -1) == S(-1, 0));
  const auto d = law.drift();
  CHECK(d.V == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(d.sigma_D2 == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(d.sigma_a2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("two-point sigma_a2 is p(0)p(-1)") {
  for (auto [m, j] : {std::pair{3, 1}, {4, 2}, {7, 5}}) {
    const auto law = WeightLaw::two_point_beta(m, j);
    const auto& p = law.annealed();
    CHECK(law.drift().sigma_a2 == doctest::Approx(p[0] * p[1]).epsilon(1e-14));
  }
}

TEST_CASE("mixture of point masses") {
  const auto law = WeightLaw::mixture({{0.5, {1.0, 0.0, 0.0}}, {0.5, {0.0, 1.0, 0.0}}});
  CHECK(law.annealed()[0] == 0.5);
  CHECK(law.annealed()[1] == 0.5);
  CHECK(law.drift().sigma_D2 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(law.drift().sigma_a2 == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("deterministic law") {
  const ProbVector v{0.3, 0.5, 0.2};
  const auto law = WeightLaw::deterministic(v);
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) CHECK(law.second_moments()(x, y) == doctest::Approx(v[x + 1] * v[y + 1]));
  CHECK(law.drift().sigma_D2 == 0.0);
  CHECK(law.annealed() == v);
}

TEST_CASE("second moment matrix invariants") {
  for (const auto& law : sample_laws()) {
    const int M = law.range();
    const auto& S = law.second_moments();
    const auto w = static_cast<int>(law.width());
    Eigen::MatrixXd A(w, w);
    for (int x = -M; x <= M; ++x) {
      double row = 0.0;
      for (int y = -M; y <= M; ++y) {
        CHECK(S(x, y) == S(y, x));
        CHECK(S(x, y) >= 0.0);
        CHECK(S(x, y) <= 1.0);
        row += S(x, y);
        A(x + M, y + M) = S(x, y);
      }
      CHECK(row == doctest::Approx(law.annealed()[x + M]).epsilon(1e-14));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    CHECK(law.drift().sigma_a2 >= law.drift().sigma_D2 - 1e-15);
  }
}

TEST_CASE("mixture drift moments match brute force") {
  const std::vector<MixtureComponent> comps{{0.2, {0.1, 0.2, 0.3, 0.4, 0.0}},
                                            {0.5, {0.0, 0.5, 0.0, 0.25, 0.25}},
                                            {0.3, {0.6, 0.0, 0.0, 0.0, 0.4}}};
  const auto law = WeightLaw::mixture(comps);
  // Drift D = sum_x x u(x) is a discrete random variable with one value per component.
  double mean = 0.0, second = 0.0;
  std::vector<double> p(5, 0.0);
  for (const auto& c : comps) {
    double D = 0.0;
    for (int x = -2; x <= 2; ++x) {
      D += x * c.p[x + 2];
      p[x + 2] += c.weight * c.p[x + 2];
    }
    mean += c.weight * D;
    second += c.weight * D * D;
  }
  double sa = 0.0;
  for (int x = -2; x <= 2; ++x) sa += (x - mean) * (x - mean) * p[x + 2];
  CHECK(law.drift().V == doctest::Approx(mean).epsilon(1e-14));
  CHECK(law.drift().sigma_D2 == doctest::Approx(second - mean * mean).epsilon(1e-13));
  CHECK(law.drift().sigma_a2 == doctest::Approx(sa).epsilon(1e-13));
}

TEST_CASE("validation failures") {
  CHECK_THROWS_AS(WeightLaw::two_point_beta(2, 2), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::two_point_beta(3, 0), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::deterministic({0.5, 0.5}), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::deterministic({0.5, 0.4, 0.0}), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::deterministic({1.5, -0.5, 0.0}), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::dirichlet({0.0, 0.0, 0.0}), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::mixture({{0.5, {1.0, 0.0, 0.0}}}), InvalidLaw);
  CHECK_THROWS_AS(WeightLaw::mixture({{0.5, {1.0, 0.0, 0.0}}, {0.5, {1.0, 0.0, 0.0, 0.0, 0.0}}}), InvalidLaw);

  // A deficit inside the tolerance is renormalized away.
  const auto law = WeightLaw::deterministic({0.5, 0.5 - 5e-13, 0.0});
  CHECK(law.annealed()[0] + law.annealed()[1] == doctest::Approx(1.0).epsilon(1e-16));
}

TEST_CASE("validate diagnostics") {
  auto d = validate(WeightLaw::two_point_beta(2, 1));
  CHECK(d.ok());
  CHECK(d.span == 1);
  CHECK(d.elliptic);

  d = validate(WeightLaw::deterministic({0.0, 1.0, 0.0}));
  CHECK_FALSE(d.elliptic);
  CHECK_FALSE(d.ok());

  d = validate(WeightLaw::deterministic({0.5, 0.0, 0.0, 0.0, 0.5}));
  CHECK(d.span == 4);
  CHECK_FALSE(d.span_ok);

  d = validate(WeightLaw::dirichlet({1.0, 0.0, 1.0}));
  CHECK(d.span == 2);
  CHECK(d.elliptic);

  d = validate(WeightLaw::mixture({{0.5, {1.0, 0.0, 0.0}}, {0.5, {0.0, 1.0, 0.0}}}));
  CHECK(d.span_ok);
  CHECK_FALSE(d.elliptic);
}

TEST_CASE("sampled moments within 4 SE") {
  constexpr int kDraws = 1'000'000;
  for (const auto& law : sample_laws()) {
    const int w = static_cast<int>(law.width());
    const int M = law.range();
    std::vector<double> s1(w, 0.0), s1sq(w, 0.0), s2(w * w, 0.0), s2sq(w * w, 0.0);
    std::vector<double> u(w);
    SiteRng rng(mix64(0x5eed + w));
    for (int i = 0; i < kDraws; ++i) {
      law.sample(rng, u);
      double total = 0.0;
      for (int a = 0; a < w; ++a) {
        CHECK_MESSAGE(u[a] >= 0.0, law.describe());
        total += u[a];
        s1[a] += u[a];
        s1sq[a] += u[a] * u[a];
        for (int b = 0; b < w; ++b) {
          const double v = u[a] * u[b];
          s2[a * w + b] += v;
          s2sq[a * w + b] += v * v;
        }
      }
      if (std::abs(total - 1.0) > 1e-12) FAIL_CHECK("vector does not sum to 1: " << law.describe());
    }
    auto within = [&](double sum, double sumsq, double target) {
      const double mean = sum / kDraws;
      const double var = std::max(sumsq / kDraws - mean * mean, 0.0);
      const double se = std::sqrt(var / kDraws);
      return std::abs(mean - target) <= 4.0 * se + 1e-9 * std::abs(target);  // roundoff floor for constant draws
    };
    for (int a = 0; a < w; ++a) {
      CHECK_MESSAGE(within(s1[a], s1sq[a], law.annealed()[a]), law.describe());
      for (int b = 0; b < w; ++b) {
        CHECK_MESSAGE(within(s2[a * w + b], s2sq[a * w + b], law.second_moments()(a - M, b - M)), law.describe());
      }
    }
  }
}
