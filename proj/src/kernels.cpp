#include "rap/kernels.hpp"

#include <algorithm>
#include <cstdlib>

namespace rap {

int LatticeKernel::reach() const noexcept {
  int r = 0;
  for (int y = -half_width; y <= half_width; ++y)
    if ((*this)(y) > 0.0) r = std::max(r, std::abs(y));
  return r;
}

double LatticeKernel::variance() const noexcept {
  double v = 0.0;
  for (int y = -half_width; y <= half_width; ++y) v += static_cast<double>(y) * y * (*this)(y);
  return v;
}

int PerturbedWalk::reach() const noexcept { return std::max(q.reach(), qbar.reach()); }

PerturbedWalk q_kernels(const WeightLaw& law) {
  const int M = law.range();
  const int H = 2 * M;
  const auto& S = law.second_moments();
  const auto& p = law.annealed();
  PerturbedWalk w;
  w.q.half_width = w.qbar.half_width = H;
  w.q.pmf.assign(static_cast<std::size_t>(2 * H + 1), 0.0);
  w.qbar.pmf.assign(static_cast<std::size_t>(2 * H + 1), 0.0);
  for (int z = -M; z <= M; ++z) {
    for (int zz = -M; zz <= M; ++zz) {
      const auto idx = static_cast<std::size_t>(zz - z + H);
      w.q.pmf[idx] += S(z, zz);
      w.qbar.pmf[idx] += p[static_cast<std::size_t>(z + M)] * p[static_cast<std::size_t>(zz + M)];
    }
  }
  return w;
}

PerturbedWalk homogeneous(const LatticeKernel& qbar) { return PerturbedWalk{qbar, qbar}; }

}  // namespace rap
