#include "rap/weight_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rap/errors.hpp"

namespace rap {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int range_from_width(std::size_t width, const char* what) {
  if (width < 3 || width % 2 == 0) {
    throw InvalidLaw(std::string(what) + ": vector length must be odd and at least 3 (2M+1 with M >= 1)");
  }
  return static_cast<int>((width - 1) / 2);
}

// Enforces the realizability invariant: entries in [0, 1], total mass 1.
// A deficit within kProbTolerance is renormalized away.
void normalize_probability(ProbVector& p, const char* what) {
  double total = 0.0;
  for (double& v : p) {
    if (!std::isfinite(v)) throw InvalidLaw(std::string(what) + ": non-finite probability");
    if (v < 0.0) {
      if (v < -kProbTolerance) throw InvalidLaw(std::string(what) + ": negative probability");
      v = 0.0;
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kProbTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": probabilities sum to " << total << ", not 1";
    throw InvalidLaw(os.str());
  }
  for (double& v : p) v /= total;
}

void print_vector(std::ostream& os, const std::vector<double>& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
}

}  // namespace

SecondMomentMatrix::SecondMomentMatrix(int range, std::vector<double> entries)
    : range_(range), entries_(std::move(entries)) {}

WeightLaw::WeightLaw(LawVariant variant) : variant_(std::move(variant)) {
  std::visit(
      Overloaded{
          [&](DeterministicWeights& d) {
            range_ = range_from_width(d.p.size(), "deterministic");
            normalize_probability(d.p, "deterministic");
          },
          [&](TwoPointBeta& b) {
            if (!(b.j >= 1 && b.m > b.j)) {
              throw InvalidLaw("two_point_beta: need integers m > j >= 1");
            }
            range_ = 1;
          },
          [&](DirichletWindow& d) {
            range_ = range_from_width(d.alpha.size(), "dirichlet");
            double total = 0.0;
            for (double a : d.alpha) {
              if (!std::isfinite(a) || a < 0.0) throw InvalidLaw("dirichlet: concentrations must be finite and >= 0");
              total += a;
            }
            if (total <= 0.0) throw InvalidLaw("dirichlet: at least one concentration must be positive");
          },
          [&](FiniteMixture& f) {
            if (f.components.empty()) throw InvalidLaw("mixture: no components");
            range_ = range_from_width(f.components.front().p.size(), "mixture");
            double total = 0.0;
            for (auto& c : f.components) {
              if (c.p.size() != f.components.front().p.size()) {
                throw InvalidLaw("mixture: component vectors differ in length");
              }
              if (!std::isfinite(c.weight) || c.weight < 0.0) throw InvalidLaw("mixture: weights must be >= 0");
              normalize_probability(c.p, "mixture component");
              total += c.weight;
            }
            if (std::abs(total - 1.0) > kProbTolerance) throw InvalidLaw("mixture: weights must sum to 1");
            for (auto& c : f.components) c.weight /= total;
          },
      },
      variant_);

  const std::size_t w = width();
  const int M = range_;
  annealed_.assign(w, 0.0);
  std::vector<double> S(w * w, 0.0);
  auto s_at = [&](std::size_t a, std::size_t b) -> double& { return S[a * w + b]; };

  std::visit(
      Overloaded{
          [&](const DeterministicWeights& d) {
            annealed_ = d.p;
            for (std::size_t a = 0; a < w; ++a)
              for (std::size_t b = 0; b < w; ++b) s_at(a, b) = d.p[a] * d.p[b];
          },
          [&](const TwoPointBeta& b) {
            const double m = b.m;
            const double a = b.j;
            const double c = b.m - b.j;
            annealed_[0] = a / m;  // step -1
            annealed_[1] = c / m;  // step 0
            const double denom = m * (m + 1.0);
            s_at(0, 0) = a * (a + 1.0) / denom;
            s_at(1, 1) = c * (c + 1.0) / denom;
            s_at(0, 1) = s_at(1, 0) = a * c / denom;
          },
          [&](const DirichletWindow& d) {
            const double a0 = std::accumulate(d.alpha.begin(), d.alpha.end(), 0.0);
            const double denom = a0 * (a0 + 1.0);
            for (std::size_t a = 0; a < w; ++a) {
              annealed_[a] = d.alpha[a] / a0;
              for (std::size_t b = 0; b < w; ++b) {
                s_at(a, b) = (a == b ? d.alpha[a] * (d.alpha[a] + 1.0) : d.alpha[a] * d.alpha[b]) / denom;
              }
            }
          },
          [&](const FiniteMixture& f) {
            for (const auto& c : f.components) {
              for (std::size_t a = 0; a < w; ++a) {
                annealed_[a] += c.weight * c.p[a];
                for (std::size_t b = 0; b < w; ++b) s_at(a, b) += c.weight * c.p[a] * c.p[b];
              }
            }
          },
      },
      variant_);
  second_ = SecondMomentMatrix(M, std::move(S));

  min_step_ = M;
  max_step_ = -M;
  for (int j = -M; j <= M; ++j) {
    if (annealed_[static_cast<std::size_t>(j + M)] > 0.0) {
      min_step_ = std::min(min_step_, j);
      max_step_ = std::max(max_step_, j);
    }
  }

  double V = 0.0;
  for (int x = -M; x <= M; ++x) V += x * annealed_[static_cast<std::size_t>(x + M)];
  double sa = 0.0;
  for (int x = -M; x <= M; ++x) sa += (x - V) * (x - V) * annealed_[static_cast<std::size_t>(x + M)];
  double sd = 0.0;
  if (!std::holds_alternative<DeterministicWeights>(variant_)) {
    for (int x = -M; x <= M; ++x)
      for (int y = -M; y <= M; ++y) sd += (x - V) * (y - V) * second_(x, y);
  }
  drift_ = DriftMoments{V, std::max(sd, 0.0), sa};
}

WeightLaw WeightLaw::deterministic(ProbVector p) { return WeightLaw(DeterministicWeights{std::move(p)}); }
WeightLaw WeightLaw::two_point_beta(int m, int j) { return WeightLaw(TwoPointBeta{m, j}); }
WeightLaw WeightLaw::dirichlet(std::vector<double> alpha) { return WeightLaw(DirichletWindow{std::move(alpha)}); }
WeightLaw WeightLaw::mixture(std::vector<MixtureComponent> components) {
  return WeightLaw(FiniteMixture{std::move(components)});
}

std::string WeightLaw::name() const {
  return std::visit(Overloaded{
                        [](const DeterministicWeights&) { return std::string("deterministic"); },
                        [](const TwoPointBeta&) { return std::string("two_point_beta"); },
                        [](const DirichletWindow&) { return std::string("dirichlet"); },
                        [](const FiniteMixture&) { return std::string("mixture"); },
                    },
                    variant_);
}

std::string WeightLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << name() << '(';
  std::visit(Overloaded{
                 [&](const DeterministicWeights& d) {
                   os << "p=";
                   print_vector(os, d.p);
                 },
                 [&](const TwoPointBeta& b) { os << "m=" << b.m << ",j=" << b.j; },
                 [&](const DirichletWindow& d) {
                   os << "alpha=";
                   print_vector(os, d.alpha);
                 },
                 [&](const FiniteMixture& f) {
                   for (std::size_t k = 0; k < f.components.size(); ++k) {
                     os << (k ? ";" : "") << f.components[k].weight << ':';
                     print_vector(os, f.components[k].p);
                   }
                 },
             },
             variant_);
  os << ')';
  return os.str();
}

bool WeightLaw::is_uniform_two_point() const noexcept {
  const auto* b = std::get_if<TwoPointBeta>(&variant_);
  return b != nullptr && b->m == 2 && b->j == 1;
}

double WeightLaw::sample_two_point_left(SiteRng& rng) const {
  const auto& b = std::get<TwoPointBeta>(variant_);
  const int a = b.j;
  const int c = b.m - b.j;
  if (a == 1 && c == 1) return rng.uniform();
  // Inverse CDF when one shape parameter is 1: one uniform per site.
  if (a == 1) return 1.0 - std::pow(rng.uniform(), 1.0 / c);
  if (c == 1) return std::pow(rng.uniform(), 1.0 / a);
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gc(c, 1.0);
  const double x = ga(rng);
  const double y = gc(rng);
  return x / (x + y);
}

void WeightLaw::sample(SiteRng& rng, std::span<double> out) const {
  std::visit(Overloaded{
                 [&](const DeterministicWeights& d) { std::copy(d.p.begin(), d.p.end(), out.begin()); },
                 [&](const TwoPointBeta&) {
                   const double left = sample_two_point_left(rng);
                   out[0] = left;
                   out[1] = 1.0 - left;
                   out[2] = 0.0;
                 },
                 [&](const DirichletWindow& d) {
                   double total = 0.0;
                   for (std::size_t i = 0; i < d.alpha.size(); ++i) {
                     double g = 0.0;
                     if (d.alpha[i] > 0.0) {
                       std::gamma_distribution<double> dist(d.alpha[i], 1.0);
                       g = dist(rng);
                     }
                     out[i] = g;
                     total += g;
                   }
                   for (std::size_t i = 0; i < d.alpha.size(); ++i) out[i] /= total;
                 },
                 [&](const FiniteMixture& f) {
                   const double u = rng.uniform();
                   double acc = 0.0;
                   const MixtureComponent* pick = &f.components.back();
                   for (const auto& c : f.components) {
                     acc += c.weight;
                     if (u < acc) {
                       pick = &c;
                       break;
                     }
                   }
                   std::copy(pick->p.begin(), pick->p.end(), out.begin());
                 },
             },
             variant_);
}

ProbVector annealed_vector(const WeightLaw& law) { return law.annealed(); }
SecondMomentMatrix second_moments(const WeightLaw& law) { return law.second_moments(); }
DriftMoments drift_moments(const WeightLaw& law) { return law.drift(); }

int lattice_span(const ProbVector& p, int range) {
  int first = 0;
  bool have_first = false;
  int g = 0;
  for (int j = -range; j <= range; ++j) {
    if (p[static_cast<std::size_t>(j + range)] <= 0.0) continue;
    if (!have_first) {
      first = j;
      have_first = true;
    } else {
      g = std::gcd(g, j - first);
    }
  }
  return g;
}

LawDiagnostics validate(const WeightLaw& law) {
  LawDiagnostics d;
  d.annealed = law.annealed();
  d.moments = law.drift();
  d.span = lattice_span(d.annealed, law.range());
  d.span_ok = d.span == 1;
  if (!d.span_ok) {
    d.failures.push_back(d.span == 0 ? "span: annealed walk is a point mass"
                                     : "span: annealed step distribution has span " + std::to_string(d.span));
  }

  auto vector_averages = [](const ProbVector& p) { return *std::max_element(p.begin(), p.end()) < 1.0; };
  d.elliptic = std::visit(Overloaded{
                              [&](const DeterministicWeights& w) { return vector_averages(w.p); },
                              [](const TwoPointBeta&) { return true; },
                              [](const DirichletWindow& w) {
                                return std::count_if(w.alpha.begin(), w.alpha.end(), [](double a) { return a > 0.0; }) >= 2;
                              },
                              [&](const FiniteMixture& f) {
                                return std::any_of(f.components.begin(), f.components.end(), [&](const MixtureComponent& c) {
                                  return c.weight > 0.0 && vector_averages(c.p);
                                });
                              },
                          },
                          law.variant());
  if (!d.elliptic) d.failures.push_back("ellipticity: P{max_j u(j) < 1} = 0");
  return d;
}

}  // namespace rap
