#pragma once

// The law of one random probability vector u = (u(j) : -M <= j <= M), with
// exact first and second moments.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rap/random.hpp"

namespace rap {

inline constexpr double kProbTolerance = 1e-12;

// Probability vectors are stored with index j + M for the step j.
using ProbVector = std::vector<double>;

struct DeterministicWeights {
  ProbVector p;
};

// Support {-1, 0}; u(-1) ~ Beta(j, m - j) and u(0) = 1 - u(-1).
struct TwoPointBeta {
  int m = 2;
  int j = 1;
};

// Dirichlet over the 2M+1 slots. Zero concentrations pin a slot to 0.
struct DirichletWindow {
  std::vector<double> alpha;
};

struct MixtureComponent {
  double weight = 0.0;
  ProbVector p;
};

struct FiniteMixture {
  std::vector<MixtureComponent> components;
};

using LawVariant = std::variant<DeterministicWeights, TwoPointBeta, DirichletWindow, FiniteMixture>;

// S(x, y) = E[u(x) u(y)] for x, y in [-M, M].
class SecondMomentMatrix {
 public:
  SecondMomentMatrix() = default;
  SecondMomentMatrix(int range, std::vector<double> entries);

  int range() const noexcept { return range_; }
  double operator()(int x, int y) const noexcept {
    const auto w = static_cast<std::size_t>(2 * range_ + 1);
    return entries_[static_cast<std::size_t>(x + range_) * w + static_cast<std::size_t>(y + range_)];
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  int range_ = 0;
  std::vector<double> entries_;
};

struct DriftMoments {
  double V = 0.0;         // mean drift
  double sigma_D2 = 0.0;  // variance of the drift D(omega)
  double sigma_a2 = 0.0;  // variance of one annealed step
};

// Immutable after construction; safe to share between threads.
class WeightLaw {
 public:
  // Validates parameters and renormalizes probability vectors whose mass
  // deficit is within kProbTolerance. Throws InvalidLaw otherwise.
  explicit WeightLaw(LawVariant variant);

  static WeightLaw deterministic(ProbVector p);
  static WeightLaw two_point_beta(int m, int j);
  static WeightLaw dirichlet(std::vector<double> alpha);
  static WeightLaw mixture(std::vector<MixtureComponent> components);

  int range() const noexcept { return range_; }
  std::size_t width() const noexcept { return static_cast<std::size_t>(2 * range_ + 1); }
  const LawVariant& variant() const noexcept { return variant_; }
  std::string name() const;
  std::string describe() const;

  // Smallest and largest step j that any realization can put mass on.
  int min_step() const noexcept { return min_step_; }
  int max_step() const noexcept { return max_step_; }

  const ProbVector& annealed() const noexcept { return annealed_; }
  const SecondMomentMatrix& second_moments() const noexcept { return second_; }
  const DriftMoments& drift() const noexcept { return drift_; }

  // Two-point law whose u(-1) is a single uniform: Beta(1, 1).
  bool is_uniform_two_point() const noexcept;

  // Draw one vector into `out` (length width()).
  void sample(SiteRng& rng, std::span<double> out) const;

  // u(-1) of a TwoPointBeta draw; used by the row fast paths.
  double sample_two_point_left(SiteRng& rng) const;

 private:
  LawVariant variant_;
  int range_ = 0;
  int min_step_ = 0;
  int max_step_ = 0;
  ProbVector annealed_;
  SecondMomentMatrix second_;
  DriftMoments drift_;
};

ProbVector annealed_vector(const WeightLaw& law);
SecondMomentMatrix second_moments(const WeightLaw& law);
DriftMoments drift_moments(const WeightLaw& law);

struct LawDiagnostics {
  int span = 0;  // gcd of support differences of p(0, .); 0 for a point mass
  bool span_ok = false;
  bool elliptic = false;
  DriftMoments moments;
  ProbVector annealed;
  std::vector<std::string> failures;

  bool ok() const noexcept { return failures.empty(); }
};

// Never throws for a constructed law; reports every failed hypothesis.
LawDiagnostics validate(const WeightLaw& law);

// Lattice span of a probability vector indexed by j + M.
int lattice_span(const ProbVector& p, int range);

}  // namespace rap
