// Box-constrained cyclic coordinate descent driven by an exact 1-d line search.
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tlreg::detail {

struct DescentResult {
  double loss = 0.0;
  double initial_loss = 0.0;
  int sweeps = 0;
};

/// `line_search(j, coef)` returns the minimiser t in [-bound, bound] of the
/// objective along coordinate j (other coordinates fixed) together with the
/// objective at t. `objective(coef)` evaluates the objective directly; it is
/// the reference for accepting a move, so the loss never increases.
template <class LineSearch, class Objective>
DescentResult coordinate_descent(std::vector<double>& coef, double bound, LineSearch&& line_search,
                                 Objective&& objective, double tolerance = 1e-10,
                                 int max_sweeps = 100) {
  DescentResult result;
  double current = objective(std::span<const double>(coef));
  result.initial_loss = current;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const double start = current;
    for (std::size_t j = 0; j < coef.size(); ++j) {
      auto [t, predicted] = line_search(j, std::span<const double>(coef));
      (void)predicted;
      if (t > bound) t = bound;
      if (t < -bound) t = -bound;
      if (t == coef[j]) continue;
      const double old = coef[j];
      coef[j] = t;
      const double value = objective(std::span<const double>(coef));
      if (value < current) {
        current = value;
      } else {
        coef[j] = old;
      }
    }
    result.sweeps = sweep + 1;
    if (start - current < tolerance) break;
  }
  result.loss = current;
  return result;
}

}  // namespace tlreg::detail
