#include <gtest/gtest.h>

#include <cmath>

#include "chasesim/random.hpp"
#include "chasesim/stats.hpp"

using namespace chasesim;

TEST(Wilson, ZeroSuccesses) {
  const Interval ci = wilson_interval(0, 100);
  EXPECT_EQ(ci.low, 0.0);
  EXPECT_NEAR(ci.high, 0.037, 5e-4);
}

TEST(Wilson, Ordering) {
  for (std::uint64_t n : {1u, 2u, 7u, 100u, 5000u})
    for (std::uint64_t k = 0; k <= n; k += std::max<std::uint64_t>(1, n / 13)) {
      const Interval ci = wilson_interval(k, n);
      const double p = static_cast<double>(k) / n;
      EXPECT_LE(0.0, ci.low);
      EXPECT_LE(ci.low, p);
      EXPECT_LE(p, ci.high);
      EXPECT_LE(ci.high, 1.0);
    }
  EXPECT_THROW(wilson_interval(0, 0), Error);
}

TEST(Wilson, Coverage) {
  for (double p : {0.05, 0.3, 0.5}) {
    std::uint64_t covered = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
      RandomStream rng(derive_seed(1, {rep}));
      std::uint64_t k = 0;
      for (int i = 0; i < 200; ++i) k += rng.uniform() < p;
      const Interval ci = wilson_interval(k, 200);
      covered += ci.low <= p && p <= ci.high;
    }
    EXPECT_GE(covered, 930u) << p;
  }
}

TEST(ChiSquare, IdenticalSamples) {
  std::vector<std::uint64_t> a;
  RandomStream rng(1);
  for (int i = 0; i < 5000; ++i) a.push_back(rng.index(6));
  const auto r = distribution_compare(a, a);
  EXPECT_NEAR(r.chi2, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.dof, 5u);
}

TEST(ChiSquare, DetectsDifferentRates) {
  std::vector<std::uint64_t> a, b;
  RandomStream rng(2);
  for (int i = 0; i < 100000; ++i) {
    a.push_back(static_cast<std::uint64_t>(std::floor(rng.exponential(1.0) * 4)));
    b.push_back(static_cast<std::uint64_t>(std::floor(rng.exponential(3.0) * 4)));
  }
  EXPECT_FALSE(distribution_compare(a, b).pass);
}

TEST(ChiSquare, Calibration) {
  // Same sampler twice: accepted at 0.01 in about 99% of trials.
  int passes = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng(derive_seed(9, {static_cast<std::uint64_t>(t)}));
    std::vector<std::uint64_t> a, b;
    for (int i = 0; i < 2000; ++i) {
      a.push_back(static_cast<std::uint64_t>(rng.exponential(0.5)));
      b.push_back(static_cast<std::uint64_t>(rng.exponential(0.5)));
    }
    passes += distribution_compare(a, b).pass;
  }
  EXPECT_GE(passes, static_cast<int>(0.97 * trials));
}

TEST(ChiSquare, Errors) {
  const std::vector<int> one{3, 3, 3}, empty;
  try {
    distribution_compare(one, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSupport);
  }
  try {
    distribution_compare(one, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(ChiSquare, BinsRespectMinimum) {
  std::vector<std::uint64_t> a, b;
  RandomStream rng(4);
  for (int i = 0; i < 300; ++i) {
    a.push_back(static_cast<std::uint64_t>(rng.exponential(0.2)));
    b.push_back(static_cast<std::uint64_t>(rng.exponential(0.2)));
  }
  const auto r = distribution_compare(a, b, 5);
  // 600 pooled points with at least 10 expected per bin gives at most 60 bins.
  EXPECT_LE(r.bins, 60u);
  EXPECT_GE(r.bins, 2u);
}

TEST(MeanEstimate, Basics) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto m = mean_and_error(std::span<const double>(xs));
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
}
