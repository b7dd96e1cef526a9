#include "eclat/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eclat/errors.hpp"

namespace eclat {

namespace {
constexpr double kSumTolerance = 1e-7;
constexpr double kRangeSlack = 1e-12;
}  // namespace

SystematicSampler::SystematicSampler(std::span<const double> marginals, int k) : k_(k) {
  if (k < 0 || k > static_cast<int>(marginals.size())) {
    throw BadMarginals("k must be in [0, number of racks]");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < marginals.size(); ++j) {
    const double p = marginals[j];
    if (!(p >= -kRangeSlack && p <= 1.0 + kRangeSlack)) {
      std::ostringstream msg;
      msg << "entry " << j << " = " << p << " is outside [0, 1]";
      throw BadMarginals(msg.str());
    }
    sum += std::clamp(p, 0.0, 1.0);
  }
  if (std::abs(sum - k) > kSumTolerance) {
    std::ostringstream msg;
    msg << "marginals sum to " << sum << ", expected " << k;
    throw BadMarginals(msg.str());
  }
  cumulative_.resize(marginals.size());
  double running = 0.0;
  const double scale = sum > 0.0 ? k / sum : 0.0;
  for (std::size_t j = 0; j < marginals.size(); ++j) {
    running += std::clamp(marginals[j], 0.0, 1.0) * scale;
    cumulative_[j] = running;
  }
  if (!cumulative_.empty()) cumulative_.back() = k;
}

void SystematicSampler::draw(double u, std::vector<int>& out) const {
  out.clear();
  const int last = static_cast<int>(cumulative_.size()) - 1;
  int j = 0;
  for (int t = 0; t < k_; ++t) {
    const double point = u + t;
    while (j < last && cumulative_[j] <= point) ++j;
    // Rescaling can leave a point at the boundary of a rack already taken.
    if (!out.empty() && out.back() >= j) j = std::min(out.back() + 1, last);
    out.push_back(j);
  }
}

std::vector<int> sample_k_subset(std::span<const double> marginals, int k, double u) {
  std::vector<int> out;
  SystematicSampler(marginals, k).draw(u, out);
  return out;
}

}  // namespace eclat
