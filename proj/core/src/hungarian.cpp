#include "eclat/hungarian.hpp"

#include <cmath>
#include <limits>

#include "eclat/errors.hpp"

namespace eclat {

EdgeWeightMatrix::EdgeWeightMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : size_(static_cast<int>(rows.size())) {
  data_.reserve(static_cast<std::size_t>(size_) * size_);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != size_) {
      throw NumericalFailure("EdgeWeightMatrix must be square");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

namespace {

double sanitized(double c) {
  return (std::isnan(c) || c >= kForbiddenCost) ? kForbiddenCost : c;
}

// Shortest augmenting path Hungarian algorithm on the submatrix selected by
// rows/cols (equal sizes). Returns, for each selected row, the position of
// its matched column within cols.
std::vector<int> solve(const EdgeWeightMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  const int n = static_cast<int>(rows.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0);
  std::vector<int> way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = sanitized(m.at(rows[i0 - 1], cols[j - 1])) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) match[p[j] - 1] = j - 1;
  }
  return match;
}

double matched_cost(const EdgeWeightMatrix& m, const std::vector<int>& rows,
                    const std::vector<int>& cols, const std::vector<int>& match) {
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) total += sanitized(m.at(rows[r], cols[match[r]]));
  return total;
}

}  // namespace

Assignment hungarian_assign(const EdgeWeightMatrix& costs) {
  const int n = costs.size();
  Assignment result;
  if (n == 0) return result;

  std::vector<int> rows(n);
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) rows[i] = cols[i] = i;
  const double best = matched_cost(costs, rows, cols, solve(costs, rows, cols));
  if (best >= kForbiddenCost) throw NoPerfectMatching("every perfect matching uses a forbidden pair");
  const double tolerance = 1e-12 * (1.0 + std::abs(best));

  // Fix rows in order, each to the smallest column that still admits an
  // optimal completion.
  result.row_to_col.assign(n, -1);
  double prefix = 0.0;
  std::vector<int> free_cols = cols;
  for (int row = 0; row < n; ++row) {
    std::vector<int> rest_rows(rows.begin() + row + 1, rows.end());
    bool placed = false;
    for (std::size_t c = 0; c < free_cols.size() && !placed; ++c) {
      const double entry = sanitized(costs.at(row, free_cols[c]));
      if (entry >= kForbiddenCost) continue;
      std::vector<int> rest_cols = free_cols;
      rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(c));
      double completion = 0.0;
      if (!rest_rows.empty()) {
        completion = matched_cost(costs, rest_rows, rest_cols, solve(costs, rest_rows, rest_cols));
      }
      if (prefix + entry + completion <= best + tolerance) {
        result.row_to_col[row] = free_cols[c];
        prefix += entry;
        free_cols = std::move(rest_cols);
        placed = true;
      }
    }
    if (!placed) throw NumericalFailure("hungarian: lexicographic completion failed");
  }
  for (int r = 0; r < n; ++r) result.cost += costs.at(r, result.row_to_col[r]);
  return result;
}

}  // namespace eclat
