#include "eclat/projection.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "eclat/errors.hpp"

namespace eclat {

namespace {

struct Breakpoint {
  double at;
  int kind;  // 0: coordinate leaves its cap, 1: coordinate reaches zero
  std::size_t index;
};

}  // namespace

void project_capped_simplex(std::span<double> y, std::span<const double> upper, double total) {
  const std::size_t n = y.size();
  if (n == 0) return;
  double cap_sum = 0.0;
  for (double u : upper) cap_sum += u;
  if (cap_sum < total * (1.0 - 1e-12)) {
    throw NoFeasibleWeights("capped simplex is empty: sum of caps " + std::to_string(cap_sum) +
                            " < " + std::to_string(total));
  }

  std::vector<Breakpoint> points;
  points.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back({y[i] - upper[i], 0, i});
    points.push_back({y[i], 1, i});
  }
  std::sort(points.begin(), points.end(), [](const Breakpoint& a, const Breakpoint& b) {
    return a.at != b.at ? a.at < b.at : a.kind < b.kind;
  });

  // phi(tau) = sum_capped_u + sum_free_y - free_count * tau for tau between breakpoints.
  double sum_capped = cap_sum;
  double sum_free = 0.0;
  double free_count = 0.0;
  double tau = points.back().at;
  double previous = points.front().at;
  for (const auto& bp : points) {
    const double phi = sum_capped + sum_free - free_count * bp.at;
    if (phi <= total) {
      tau = free_count > 0.0 ? (sum_capped + sum_free - total) / free_count : previous;
      break;
    }
    if (bp.kind == 0) {
      sum_capped -= upper[bp.index];
      sum_free += y[bp.index];
      free_count += 1.0;
    } else {
      sum_free -= y[bp.index];
      free_count -= 1.0;
    }
    previous = bp.at;
  }
  for (std::size_t i = 0; i < n; ++i) y[i] = std::clamp(y[i] - tau, 0.0, upper[i]);
}

void project_capped_simplex(std::span<double> y, double upper, double total) {
  std::vector<double> caps(y.size(), upper);
  project_capped_simplex(y, caps, total);
}

}  // namespace eclat
