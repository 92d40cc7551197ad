#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "moodnet/rng.hpp"

using moodnet::mix_seed;
using moodnet::Rng;

TEST(RngTest, MixSeedIsDeterministic) {
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
  EXPECT_NE(mix_seed(0, moodnet::kStreamInit), mix_seed(0, moodnet::kStreamShuffle));
  EXPECT_NE(mix_seed(0, moodnet::kStreamShuffle), mix_seed(0, moodnet::kStreamDropout));
}

TEST(RngTest, MixSeedSpreadsNearbyInputs) {
  // Consecutive seeds and salts should not collide over a small scan.
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    for (std::uint64_t salt = 0; salt < 64; ++salt) {
      seen.insert(mix_seed(seed, salt));
    }
  }
  EXPECT_EQ(seen.size(), 64u * 64u);
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(123), b(123), c(124);
  bool diverged = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next();
    EXPECT_EQ(va, b.next());
    if (va != c.next()) diverged = true;
  }
  EXPECT_TRUE(diverged);
}

TEST(RngTest, U01InHalfOpenUnitInterval) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.u01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RngTest, UniformRespectsBounds) {
  Rng rng(9);
  double lo_seen = 1e9, hi_seen = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(-3.0, 5.0);
    EXPECT_GE(v, -3.0);
    EXPECT_LT(v, 5.0);
    lo_seen = std::min(lo_seen, v);
    hi_seen = std::max(hi_seen, v);
  }
  EXPECT_LT(lo_seen, -2.0);
  EXPECT_GT(hi_seen, 4.0);
}

TEST(RngTest, GaussianMomentsRoughlyMatch) {
  Rng rng(11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.gaussian(2.0);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(var), 2.0, 0.05);
}

TEST(RngTest, BoundedStaysBelowBoundAndCoversResidues) {
  Rng rng(13);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = rng.bounded(5);
    EXPECT_LT(v, 5u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
}
