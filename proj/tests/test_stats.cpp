#include "oann/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace oann {
namespace {

// Reference values computed independently (scipy.stats / mpmath).

TEST(ChiSquare, PValueMatchesReference) {
  EXPECT_NEAR(chi_square_p_value(16.919, 9), 0.04999964, 1e-6);
  EXPECT_NEAR(chi_square_p_value(23.209, 10), 0.01000087, 1e-6);
  EXPECT_NEAR(chi_square_p_value(3.940, 10), 0.95001309, 1e-6);
  EXPECT_NEAR(chi_square_p_value(29.588, 10), 0.00100011, 1e-6);
}

TEST(ChiSquare, UniformStatistic) {
  // Equal counts give a zero statistic.
  EXPECT_DOUBLE_EQ(chi_square_uniform_statistic({5, 5, 5, 5}), 0.0);
  // Hand-evaluated: expected 5 per bin, (1+1+4+4)... deviations 1,-1,2,-2.
  const double stat = chi_square_uniform_statistic({6, 4, 7, 3});
  EXPECT_NEAR(stat, (1.0 + 1.0 + 4.0 + 4.0) / 5.0, 1e-12);
  EXPECT_THROW(chi_square_uniform_statistic({}), UsageError);
}

TEST(Poisson, TailMatchesDirectSummation) {
  // Independent oracle: direct summation with a different accumulator.
  auto tail = [](double lam, uint64_t s) {
    double pmf = std::exp(-lam);
    double sum = 0.0;
    for (uint64_t k = 0;; ++k) {
      if (k > s) sum += pmf;
      if (k > s + 200) break;
      pmf *= lam / static_cast<double>(k + 1);
    }
    return sum;
  };
  for (double lam : {2.0, 13.0, 62.0}) {
    for (uint64_t s : {0ull, 3ull, 20ull, 90ull}) {
      EXPECT_NEAR(poisson_tail(lam, s), tail(lam, s), 1e-9)
          << "lam=" << lam << " s=" << s;
    }
  }
}

TEST(Poisson, UpperQuantileReference) {
  // scipy: smallest s with sf(s) <= 1e-3.
  EXPECT_EQ(poisson_upper_quantile(2.0, 1e-3), 8u);
  EXPECT_EQ(poisson_upper_quantile(13.0, 1e-3), 25u);
  EXPECT_EQ(poisson_upper_quantile(19.0, 1e-3), 34u);
  EXPECT_EQ(poisson_upper_quantile(29.0, 1e-3), 47u);
  EXPECT_EQ(poisson_upper_quantile(62.0, 1e-3), 88u);
  // The chosen s really satisfies the bound and s-1 does not.
  EXPECT_LE(poisson_tail(62.0, 88), 1e-3);
  EXPECT_GT(poisson_tail(62.0, 87), 1e-3);
  EXPECT_THROW(poisson_upper_quantile(2.0, 0.0), UsageError);
}

TEST(KolmogorovSmirnov, StatisticAndThreshold) {
  // Identical samples: zero distance.
  EXPECT_DOUBLE_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
  // Disjoint samples: full separation.
  EXPECT_DOUBLE_EQ(ks_statistic({1, 2}, {10, 11}), 1.0);
  // Hand case: a={1,3}, b={2,4}: max gap 1/2.
  EXPECT_NEAR(ks_statistic({1, 3}, {2, 4}), 0.5, 1e-12);
  // Threshold formula: c(1e-3) = sqrt(-ln(5e-4)/2) = 1.94947...
  EXPECT_NEAR(ks_threshold(30, 30, 1e-3),
              1.9494705322 * std::sqrt(60.0 / 900.0), 1e-9);
}

TEST(Moments, MeanAndStddev) {
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 4}), 2.5);
  EXPECT_NEAR(sample_stddev({2, 4, 4, 4, 5, 5, 7, 9}),
              std::sqrt(32.0 / 7.0), 1e-12);
}

}  // namespace
}  // namespace oann
