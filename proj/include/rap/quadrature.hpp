#pragma once

// Adaptive Simpson quadrature with a hard budget on recursion depth and
// integrand evaluations.

#include <cmath>
#include <string>

#include "rap/errors.hpp"

namespace rap {

struct QuadratureBudget {
  int max_depth = 48;
  long max_evals = 20'000'000;
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  QuadratureBudget budget;
  long evals = 0;

  double eval(double x) {
    if (++evals > budget.max_evals) {
      throw QuadratureFailure("adaptive Simpson: evaluation budget of " + std::to_string(budget.max_evals) +
                              " exhausted");
    }
    return f(x);
  }

  double refine(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth >= budget.max_depth) {
      throw QuadratureFailure("adaptive Simpson: depth budget of " + std::to_string(budget.max_depth) +
                              " exceeded near t=" + std::to_string(m));
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace detail

// Integral of f over [a, b] to absolute tolerance `tol`. The interval is
// pre-split into `pieces` panels so that narrow features are not missed by
// the first Simpson estimate.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, QuadratureBudget budget = {}, int pieces = 8) {
  if (a == b) return 0.0;
  detail::SimpsonState<F> st{f, budget};
  const double h = (b - a) / pieces;
  double total = 0.0;
  double fa = st.eval(a);
  for (int i = 0; i < pieces; ++i) {
    const double lo = a + h * i;
    const double hi = (i + 1 == pieces) ? b : a + h * (i + 1);
    const double fm = st.eval(0.5 * (lo + hi));
    const double fb = st.eval(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += st.refine(lo, hi, fa, fm, fb, whole, tol / pieces, 0);
    fa = fb;
  }
  return total;
}

}  // namespace rap
