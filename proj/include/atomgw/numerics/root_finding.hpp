#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "atomgw/error.hpp"

namespace atomgw::numerics {

struct RootOptions {
  double absolute_tolerance = 0.0;   // 0: limited by relative tolerance only
  double relative_tolerance = 4.0 * std::numeric_limits<double>::epsilon();
  int max_iterations = 200;
};

/*!
  Safeguarded Newton iteration on a sign-changing bracket [lo, hi].

  `f(x)` returns (value, derivative). Throws SimulationError if the bracket
  does not straddle a root or the iteration fails to converge.
*/
template <typename F>
double solve_bracketed(F&& f, double lo, double hi, const RootOptions& options = {}) {
  auto [f_lo, df_lo] = f(lo);
  auto [f_hi, df_hi] = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw SimulationError("root bracket does not straddle a sign change");
  }
  // Orient so that f(lo) < 0.
  if (f_lo > 0.0) std::swap(lo, hi);

  double x = 0.5 * (lo + hi);
  double step_before_last = std::abs(hi - lo);
  double step = step_before_last;
  auto [fx, dfx] = f(x);
  for (int it = 0; it < options.max_iterations; ++it) {
    const bool newton_leaves_bracket = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
    const bool newton_too_slow = std::abs(2.0 * fx) > std::abs(step_before_last * dfx);
    step_before_last = step;
    if (newton_leaves_bracket || newton_too_slow || dfx == 0.0) {
      step = 0.5 * (hi - lo);
      x = lo + step;
    } else {
      step = fx / dfx;
      x -= step;
    }
    const double tol = std::max(options.absolute_tolerance, options.relative_tolerance * std::abs(x));
    if (std::abs(step) <= tol) return x;
    std::tie(fx, dfx) = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
  }
  throw SimulationError("bracketed root solve did not converge in " +
                        std::to_string(options.max_iterations) + " iterations");
}

}  // namespace atomgw::numerics
