#pragma once

#include <random>
#include <span>
#include <vector>

namespace eclat {

// Draws k distinct positions of `marginals` such that position j is included
// with probability marginals[j]. Systematic sampling: the marginals are laid
// end to end on [0, k) and the points u, u+1, ..., u+k-1 select the
// intervals they fall in, for a single uniform u in [0, 1).
//
// Throws BadMarginals unless every entry is in [0, 1] and the sum is k
// within 1e-7.
std::vector<int> sample_k_subset(std::span<const double> marginals, int k, double u);

template <class Rng>
std::vector<int> sample_k_subset(std::span<const double> marginals, int k, Rng& rng) {
  return sample_k_subset(marginals, k, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

// Same draw, with the marginals checked once up front and cumulative sums
// cached. Used in the simulator hot path.
class SystematicSampler {
 public:
  SystematicSampler(std::span<const double> marginals, int k);

  int k() const { return k_; }
  void draw(double u, std::vector<int>& out) const;

 private:
  int k_;
  std::vector<double> cumulative_;  // rescaled so the last entry is exactly k
};

}  // namespace eclat
