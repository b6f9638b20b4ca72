#pragma once

// Transition kernels of the difference of two walks sharing one environment.
// q is the kernel at the origin (both walks read the same vector), qbar the
// homogeneous kernel used everywhere else.

#include <vector>

#include "rap/weight_law.hpp"

namespace rap {

struct LatticeKernel {
  int half_width = 0;        // offsets in [-half_width, half_width]
  std::vector<double> pmf;   // index y + half_width

  double operator()(int y) const noexcept {
    return (y < -half_width || y > half_width) ? 0.0 : pmf[static_cast<std::size_t>(y + half_width)];
  }
  // Largest |y| with positive mass.
  int reach() const noexcept;
  // Second moment sum_y y^2 k(y).
  double variance() const noexcept;
};

struct PerturbedWalk {
  LatticeKernel q;
  LatticeKernel qbar;

  double step(int x, int y) const noexcept { return x == 0 ? q(y - x) : qbar(y - x); }
  int reach() const noexcept;
};

PerturbedWalk q_kernels(const WeightLaw& law);

// The walk with q = qbar everywhere (no perturbation at the origin).
PerturbedWalk homogeneous(const LatticeKernel& qbar);

}  // namespace rap
