#pragma once

#include <vector>

namespace eclat {

// Sentinel for forbidden assignments; larger than any finite cost sum.
inline constexpr double kForbiddenCost = 1e18;

/// Square cost matrix, row-major. Entries that are +inf or >= kForbiddenCost
/// mark forbidden pairs.
class EdgeWeightMatrix {
 public:
  EdgeWeightMatrix() = default;
  explicit EdgeWeightMatrix(int size, double fill = 0.0)
      : size_(size), data_(static_cast<std::size_t>(size) * size, fill) {}
  EdgeWeightMatrix(std::initializer_list<std::initializer_list<double>> rows);

  int size() const { return size_; }
  double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * size_ + col]; }
  double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * size_ + col]; }

 private:
  int size_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;  // sum of the chosen entries, accumulated in row order
};

/// Minimum-cost perfect matching (Kuhn-Munkres with potentials, O(n^3)).
/// Among minimum-cost matchings the lexicographically smallest row_to_col
/// is returned; costs within a relative 1e-12 of the optimum count as ties.
/// Throws NoPerfectMatching if every perfect matching uses a forbidden pair.
Assignment hungarian_assign(const EdgeWeightMatrix& costs);

}  // namespace eclat
