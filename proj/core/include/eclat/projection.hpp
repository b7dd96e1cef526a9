#pragma once

#include <span>

namespace eclat {

/// Euclidean projection of y onto { x : sum(x) = total, 0 <= x_i <= upper_i },
/// in place. Exact up to rounding: sorts the 2n breakpoints of the
/// piecewise-linear sum function and solves for the shift on the crossing
/// segment. Throws NoFeasibleWeights if sum(upper) < total.
void project_capped_simplex(std::span<double> y, std::span<const double> upper, double total);

// Same with a common upper bound.
void project_capped_simplex(std::span<double> y, double upper, double total);

}  // namespace eclat
