#include "probcast/conformal.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace probcast;
using namespace probcast::conformal;

TEST(Conformal, ThreeScoresUpperPercentile) {
  ScoreWindow w(182);
  for (double s : {1.0, 2.0, 3.0}) w.roll(s);
  const auto q = conformal_quantiles(50.0, w);
  EXPECT_DOUBLE_EQ(q(98), 53.0);
  EXPECT_DOUBLE_EQ(q(0), 47.0);
  EXPECT_DOUBLE_EQ(q(49), 50.0 + w.quantile_percent(1));
}

TEST(Conformal, RankRule) {
  ScoreWindow w(10);
  for (int i = 1; i <= 9; ++i) w.roll(i);
  // ceil(0.5 * 10) = 5, ceil(0.9 * 10) = 9, ceil(0.95 * 10) = 10 -> clamped to 9.
  EXPECT_DOUBLE_EQ(w.quantile_percent(50), 5.0);
  EXPECT_DOUBLE_EQ(w.quantile_percent(90), 9.0);
  EXPECT_DOUBLE_EQ(w.quantile_percent(95), 9.0);
  EXPECT_DOUBLE_EQ(w.quantile(0.5), 5.0);
}

TEST(Conformal, BandsAreSymmetricAndMonotone) {
  std::mt19937_64 rng(6);
  std::exponential_distribution<double> ex(0.2);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreWindow w(182);
    for (int i = 0; i < 182; ++i) w.roll(ex(rng));
    const double point = 30.0 + trial;
    const auto q = conformal_quantiles(point, w);
    for (int k = 1; k < kPercentiles; ++k) EXPECT_LE(q(k - 1), q(k));
    for (int p = 1; p < 50; ++p) {
      EXPECT_NEAR(point - q(p - 1), q(99 - p) - point, 1e-12) << "percentile " << p;
    }
  }
}

TEST(Conformal, WindowEvictsOldest) {
  ScoreWindow w(3, 7);
  for (double s : {9.0, 1.0, 2.0, 3.0}) w.roll(s);
  EXPECT_EQ(w.size(), 3u);
  EXPECT_EQ(w.scores().front(), 1.0);
  EXPECT_EQ(w.hour(), 7);
  EXPECT_DOUBLE_EQ(w.quantile_percent(99), 3.0);
}

TEST(Conformal, Errors) {
  EXPECT_THROW(ScoreWindow(0), ConfigError);
  ScoreWindow w(5);
  EXPECT_THROW(w.roll(-1.0), DataError);
  EXPECT_THROW(w.quantile(0.5), DataError);
  EXPECT_THROW(conformal_quantiles(1.0, w), DataError);
  EXPECT_DOUBLE_EQ(nonconformity(3.0, 5.5), 2.5);
}
