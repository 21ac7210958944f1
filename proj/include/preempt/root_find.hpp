#pragma once

#include <cmath>
#include <string>

#include "preempt/error.hpp"

namespace preempt {

struct BisectionOptions {
  double abs_tol = 1e-10;  ///< stop once the bracket is narrower than this
  int max_iter = 200;
};

struct BisectionResult {
  double root;
  double residual;
  int iterations;
};

/// Root of f on [lo, hi] by bisection. Requires f(lo) <= 0 < f(hi) or
/// f(lo) >= 0 > f(hi); throws NumericalFailure otherwise.
template <typename F>
BisectionResult bisect(const F& f, double lo, double hi, BisectionOptions opt = {}) {
  if (!(lo <= hi)) throw NumericalFailure("bisection: empty bracket");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0, 0};
  if (fhi == 0.0) return {hi, 0.0, 0};
  if (std::signbit(flo) == std::signbit(fhi) || std::isnan(flo) || std::isnan(fhi)) {
    throw NumericalFailure("bisection: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }
  const bool rising = flo < 0.0;
  int it = 0;
  while (hi - lo > opt.abs_tol && it < opt.max_iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // bracket at machine resolution
    const double fm = f(mid);
    ++it;
    if (fm == 0.0) return {mid, 0.0, it};
    if ((fm < 0.0) == rising) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  // Report the endpoint with the smaller residual.
  if (std::abs(flo) <= std::abs(fhi)) return {lo, flo, it};
  return {hi, fhi, it};
}

}  // namespace preempt
