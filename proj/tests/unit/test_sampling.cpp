#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <random>
#include <set>

#include "eclat/errors.hpp"
#include "eclat/sampling.hpp"

using eclat::SystematicSampler;
using eclat::sample_k_subset;

TEST(Sampling, IntegralMarginalsAreDeterministic) {
  const std::vector<double> m{0.0, 1.0, 0.0, 1.0, 1.0};
  for (double u : {0.0, 0.25, 0.5, 0.999999}) {
    EXPECT_EQ(sample_k_subset(m, 3, u), (std::vector<int>{1, 3, 4}));
  }
}

TEST(Sampling, KEqualsNIsFullSet) {
  const std::vector<double> m(5, 1.0);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(sample_k_subset(m, 5, rng), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Sampling, RejectsBadMarginals) {
  EXPECT_THROW(sample_k_subset(std::vector<double>{0.5, 0.4}, 1, 0.1), eclat::BadMarginals);
  EXPECT_THROW(sample_k_subset(std::vector<double>{1.2, -0.2}, 1, 0.1), eclat::BadMarginals);
  EXPECT_THROW(SystematicSampler(std::vector<double>{0.5, 0.5}, 2), eclat::BadMarginals);
  EXPECT_NO_THROW(sample_k_subset(std::vector<double>{0.5, 0.5 + 5e-8}, 1, 0.1));
}

TEST(Sampling, AlwaysKDistinctRacks) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const int n = 1 + t % 9;
    const int k = 1 + static_cast<int>(u(rng) * n);
    // Random marginals in [0,1] summing to k: cap-and-rescale a few rounds.
    std::vector<double> m(n);
    for (double& x : m) x = u(rng) + 1e-3;
    for (int round = 0; round < 100; ++round) {
      double sum = 0.0;
      for (double x : m) sum += x;
      for (double& x : m) x = std::min(1.0, x * k / sum);
    }
    double sum = 0.0;
    for (double x : m) sum += x;
    if (std::abs(sum - k) > 1e-9) continue;
    const auto s = sample_k_subset(m, k, u(rng));
    ASSERT_EQ(static_cast<int>(s.size()), k);
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), s.size());
    for (int j : s) EXPECT_GT(m[j], 0.0);
  }
}

TEST(Sampling, UniformFourOfSevenFrequencies) {
  const std::vector<double> m(7, 4.0 / 7.0);
  const SystematicSampler sampler(m, 4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int draws = 100000;
  std::vector<int> counts(7, 0);
  std::vector<int> out;
  for (int t = 0; t < draws; ++t) {
    sampler.draw(u(rng), out);
    ASSERT_EQ(out.size(), 4u);
    for (int j : out) ++counts[j];
  }
  const double p = 4.0 / 7.0;
  const double se = std::sqrt(p * (1 - p) / draws);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(counts[j] / double(draws), p, 3 * se) << "rack " << j;
}

TEST(Sampling, ChiSquaredOnInclusionCounts) {
  // Inclusion indicators of one draw are negatively correlated, so the
  // Pearson statistic against n - 1 degrees of freedom is conservative.
  const std::vector<double> m{0.9, 0.15, 0.6, 0.35, 1.0, 0.05, 0.95};  // sums to 4
  const SystematicSampler sampler(m, 4);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int draws = 100000;
  std::vector<double> counts(m.size(), 0.0);
  std::vector<int> out;
  for (int t = 0; t < draws; ++t) {
    sampler.draw(u(rng), out);
    for (int j : out) counts[j] += 1.0;
  }
  double stat = 0.0;
  int dof = -1;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[j] == 1.0) {
      EXPECT_EQ(counts[j], draws);
      continue;
    }
    const double e = draws * m[j];
    stat += (counts[j] - e) * (counts[j] - e) / e;
    ++dof;
  }
  const double critical = boost::math::quantile(boost::math::chi_squared(dof), 0.999);
  EXPECT_LT(stat, critical);
}
