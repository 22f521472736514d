#include <gtest/gtest.h>

#include <cmath>

#include "chasesim/bounds.hpp"
#include "chasesim/process.hpp"
#include "chasesim/stats.hpp"

using namespace chasesim;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidSpec;
}

}  // namespace

TEST(LambdaLower, Examples) {
  EXPECT_DOUBLE_EQ(lambda_lower(3, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(lambda_lower(4, 2.0), 1.0);
  EXPECT_NEAR(lambda_lower(3, 1e-12), 0.0, 1e-11);
  EXPECT_EQ(code_of([] { lambda_lower(2, 1.0); }), ErrorCode::BadDegree);
}

TEST(LambdaUpper, Examples) {
  EXPECT_NEAR(lambda_upper(3, 1.0, 0.5), 4.0 / (1.0 - std::pow(2.0, -1.0 / 3.0)), 1e-12);
  EXPECT_NEAR(lambda_upper(3, 1.0, 0.5), 19.389, 0.001);
  EXPECT_NEAR(lambda_upper(3, 1.0, 1e-15), 4.0, 1e-3);
  EXPECT_GT(lambda_upper(3, 1.0, 1.0 - 1e-12), 1e12);
  EXPECT_EQ(code_of([] { lambda_upper(3, 1.0, 1.0); }), ErrorCode::BadInputs);
  EXPECT_EQ(code_of([] { lambda_upper(3, 1.0, 0.0); }), ErrorCode::BadInputs);
  EXPECT_EQ(code_of([] { lambda_upper(2, 1.0, 0.5); }), ErrorCode::BadInputs);
  EXPECT_EQ(code_of([] { lambda_upper(3, 0.0, 0.5); }), ErrorCode::BadInputs);
}

TEST(Bracket, LowerBelowUpperOverGrid) {
  for (std::uint32_t d = 3; d <= 8; ++d)
    for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0})
      for (double pc = 0.1; pc < 0.95; pc += 0.1) {
        const BoundReport r = bound_report({d, alpha, pc});
        EXPECT_LT(r.lambda_lower, r.lambda_upper);
      }
}

TEST(Bracket, LinearInAlpha) {
  // Both bounds over alpha stay within fixed positive constants.
  for (std::uint32_t d : {3u, 5u})
    for (double pc : {0.3, 0.7})
      for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
        EXPECT_NEAR(lambda_lower(d, alpha) / alpha, 1.0 / (d - 2), 1e-12);
        const double upper = lambda_upper(d, alpha, pc) / alpha;
        const double denom = 1.0 - std::pow(pc, 1.0 / d);
        EXPECT_GE(upper, 1.0 / denom);
        EXPECT_LE(upper, (d + 1.0) / denom);
      }
}

TEST(PathSurvival, Examples) {
  EXPECT_EQ(path_survival_bound(1, 1, 3), 0.125);
  EXPECT_EQ(path_survival_bound(2.5, 0.7, 0), 1.0);
  EXPECT_NEAR(path_survival_bound(1e12, 1, 5), 1.0, 1e-10);
}

TEST(ExpectedDamage, Examples) {
  const ExtendedReal v = expected_damage_bound(0.5, 1.0, 3);
  ASSERT_FALSE(v.infinite);
  EXPECT_DOUBLE_EQ(v.value, 4.0);
  EXPECT_TRUE(expected_damage_bound(1.0, 1.0, 3).infinite);   // ratio exactly 1
  EXPECT_TRUE(expected_damage_bound(5.0, 1.0, 4).infinite);
  EXPECT_EQ(code_of([] { expected_damage_bound(0.1, 1.0, 2); }), ErrorCode::BadDegree);
}

TEST(ExpectedDamage, FiniteBelowLowerBound) {
  for (std::uint32_t d = 3; d <= 8; ++d)
    for (double alpha : {0.1, 1.0, 10.0})
      for (double frac : {0.01, 0.3, 0.6, 0.99}) {
        const double lambda = frac * lambda_lower(d, alpha);
        EXPECT_FALSE(expected_damage_bound(lambda, alpha, d).infinite);
      }
}

TEST(GoodSiteProb, Examples) {
  EXPECT_NEAR(good_site_prob_lower(1, 1, 3), 0.008, 1e-15);
  EXPECT_NEAR(good_site_prob_lower(1e12, 1, 3), 1.0, 1e-9);
  for (std::uint32_t d : {3u, 4u, 5u})
    for (double p : {0.3, 0.5, 0.9}) {
      const double alpha = 1.0;
      const double lambda = (d + alpha) / (1.0 - std::pow(p, 1.0 / d));
      EXPECT_GT(good_site_prob_lower(lambda, alpha, d), p);
    }
}

TEST(GoodSiteSim, IsolatedRoot) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    RandomStream rng(s);
    const auto r = good_site_percolation_sim(build_path(1), {1, 1}, rng);
    EXPECT_TRUE(r.good_mask[0]);
    EXPECT_EQ(r.root_cluster_size, 1u);
  }
}

TEST(GoodSiteSim, SlowRedOnK5) {
  Graph g = build_complete(5);
  std::uint64_t all_good = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    RandomStream rng(s);
    const auto r = good_site_percolation_sim(g, {1e-3, 1}, rng);
    all_good += r.good_count == 5;
    if (!r.good_mask[0]) { EXPECT_EQ(r.root_cluster_size, 0u); }
    EXPECT_LE(r.root_cluster_size, r.good_count);
  }
  EXPECT_EQ(all_good, 0u);
}

TEST(GoodSiteSim, FrequencyAboveLowerBound) {
  // Degree-4 torus: empirical good fraction not below the bound (3 sigma).
  Graph g = build_torus(10, Geometry::Torus);
  for (double lambda : {2.0, 8.0, 30.0}) {
    std::uint64_t good = 0, total = 0;
    for (std::uint64_t s = 0; total < 100000; ++s) {
      RandomStream rng(derive_seed(3, {s}));
      const auto r = good_site_percolation_sim(g, {lambda, 1}, rng);
      good += r.good_count;
      total += g.size();
    }
    const double bound = good_site_prob_lower(lambda, 1, 4);
    const double freq = static_cast<double>(good) / static_cast<double>(total);
    EXPECT_GE(freq + 3.0 * std::sqrt(bound * (1 - bound) / total), bound) << lambda;
  }
}

TEST(GoodSiteSim, RootClusterIsConnectedGoodSet) {
  Graph g = build_torus(8, Geometry::Torus);
  for (std::uint64_t s = 0; s < 200; ++s) {
    RandomStream rng(s);
    const auto r = good_site_percolation_sim(g, {20, 1}, rng);
    if (!r.good_mask[0]) continue;
    EXPECT_GE(r.root_cluster_size, 1u);
  }
}
