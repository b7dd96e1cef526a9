#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "eclat/errors.hpp"
#include "eclat/hungarian.hpp"
#include "oracle.hpp"

using eclat::EdgeWeightMatrix;
using eclat::hungarian_assign;

TEST(Hungarian, RankOneMatrix) {
  const EdgeWeightMatrix m{{1, 2, 3}, {2, 4, 6}, {3, 6, 9}};
  const auto a = hungarian_assign(m);
  EXPECT_DOUBLE_EQ(a.cost, 10.0);
  EXPECT_DOUBLE_EQ(a.cost, oracle::brute_force_assignment(m));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{2, 1, 0}));
}

TEST(Hungarian, DiagonalDominantGivesIdentity) {
  const EdgeWeightMatrix m{{0, 5, 7, 9}, {4, 1, 8, 6}, {9, 7, 2, 5}, {8, 6, 9, 3}};
  const auto a = hungarian_assign(m);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_DOUBLE_EQ(a.cost, 6.0);
}

TEST(Hungarian, OneByOne) {
  const EdgeWeightMatrix m{{4.5}};
  const auto a = hungarian_assign(m);
  EXPECT_EQ(a.row_to_col, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(a.cost, 4.5);
}

TEST(Hungarian, AllTiesPicksLexicographicallySmallest) {
  const auto a = hungarian_assign(EdgeWeightMatrix(5, 2.0));
  EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Hungarian, PartialTieBreak) {
  // Rows 0 and 2 may swap columns 1 and 2 at equal cost.
  const EdgeWeightMatrix m{{5, 1, 1}, {1, 5, 5}, {5, 1, 1}};
  const auto a = hungarian_assign(m);
  EXPECT_DOUBLE_EQ(a.cost, 3.0);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 0, 2}));
}

TEST(Hungarian, AvoidsForbiddenEntries) {
  const double inf = std::numeric_limits<double>::infinity();
  const EdgeWeightMatrix m{{inf, 1, 9}, {1, inf, 9}, {9, 9, eclat::kForbiddenCost}};
  const auto a = hungarian_assign(m);
  EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 2, 0}));
  EXPECT_DOUBLE_EQ(a.cost, 19.0);
}

TEST(Hungarian, NoPerfectMatchingThrows) {
  const double inf = std::numeric_limits<double>::infinity();
  const EdgeWeightMatrix m{{1, inf}, {2, inf}};
  EXPECT_THROW(hungarian_assign(m), eclat::NoPerfectMatching);
}

TEST(Hungarian, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> small(0, 4);
  for (int t = 0; t < 400; ++t) {
    const int n = 1 + t % 8;
    EdgeWeightMatrix m(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m.at(i, j) = t % 2 ? u(rng) : small(rng);  // integers force ties
    }
    const auto a = hungarian_assign(m);
    EXPECT_DOUBLE_EQ(a.cost, oracle::brute_force_assignment(m)) << "trial " << t;
    std::vector<int> cols = a.row_to_col;
    std::sort(cols.begin(), cols.end());
    for (int j = 0; j < n; ++j) EXPECT_EQ(cols[j], j);
  }
}

TEST(Hungarian, TieBreakIsLexicographicMinimumOverOptima) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> small(0, 2);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 5;
    EdgeWeightMatrix m(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m.at(i, j) = small(rng);
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int i = 0; i < n; ++i) c += m.at(i, perm[i]);
      if (c < best_cost) {  // permutations are visited in lexicographic order
        best_cost = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(hungarian_assign(m).row_to_col, best) << "trial " << t;
  }
}
