#include "probcast/normal.hpp"
#include "probcast/volatility.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::volatility;

namespace {

Vector simulate(double omega, double alpha, double beta, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Vector e(n);
  double s2 = omega / (1.0 - alpha - beta);
  double prev = 0.0;
  for (int burn = 0; burn < 500; ++burn) {
    s2 = omega + alpha * prev * prev + beta * s2;
    prev = std::sqrt(s2) * n01(rng);
  }
  for (int t = 0; t < n; ++t) {
    s2 = omega + alpha * prev * prev + beta * s2;
    prev = std::sqrt(s2) * n01(rng);
    e(t) = prev;
  }
  return e;
}

}  // namespace

TEST(Garch, LogLikelihoodOracle) {
  Vector e(5);
  e << 0.5, -1.2, 0.3, 2.0, -0.7;
  EXPECT_NEAR(garch_log_likelihood(e, 0.1, 0.1, 0.8, 1.3), -7.8942970470145593857, 1e-12);
}

TEST(Garch, VariancesFollowTheRecursion) {
  GarchModel m;
  m.omega = 0.2;
  m.alpha = 0.15;
  m.beta = 0.7;
  m.initial_variance = 2.0;
  Vector e(3);
  e << 1.0, -2.0, 0.5;
  const Vector s2 = garch_variances(m, e);
  ASSERT_EQ(s2.size(), 4);
  EXPECT_DOUBLE_EQ(s2(0), 2.0);
  EXPECT_DOUBLE_EQ(s2(1), 0.2 + 0.15 * 1.0 + 0.7 * 2.0);
  EXPECT_DOUBLE_EQ(s2(3), 0.2 + 0.15 * 0.25 + 0.7 * s2(2));
  EXPECT_DOUBLE_EQ(forecast_variance(m, e, 1)(0), s2(3));
}

TEST(Garch, LongHorizonApproachesUnconditionalVariance) {
  GarchModel m;
  m.omega = 0.1;
  m.alpha = 0.1;
  m.beta = 0.8;
  m.initial_variance = 5.0;
  Vector e(2);
  e << 3.0, -4.0;
  const Vector path = forecast_variance(m, e, 400);
  EXPECT_NEAR(path(399), m.unconditional_variance(), 1e-10);
  // Each step pulls the forecast toward the long-run level.
  for (int k = 1; k < 400; ++k) {
    EXPECT_LE(std::abs(path(k) - 1.0), std::abs(path(k - 1) - 1.0) + 1e-15);
  }
}

TEST(Garch, RecoversParametersOnLongSeries) {
  const Vector e = simulate(0.1, 0.1, 0.8, 8000, 17);
  const GarchModel m = fit_garch(e, 0);
  EXPECT_NEAR(m.alpha, 0.1, 0.05);
  EXPECT_NEAR(m.beta, 0.8, 0.08);
  EXPECT_LT(m.persistence(), 1.0);
}

TEST(Garch, WhiteNoiseHasLittleArchEffect) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  Vector e(3000);
  for (auto& v : e) v = 2.0 * n01(rng);
  const GarchModel m = fit_garch(e);
  EXPECT_LT(m.alpha, 0.05);
  EXPECT_NEAR(garch_variances(m, e).tail(200).mean(), 4.0, 0.6);
}

TEST(Garch, RejectsShortInput) {
  EXPECT_THROW(fit_garch(Vector::Ones(49)), DataError);
  EXPECT_THROW(fit_garch(Vector::Zero(60)), DataError);
}

TEST(Garch, FilterMatchesBatchRecursion) {
  const Vector e = simulate(0.2, 0.12, 0.75, 300, 2);
  const GarchModel m = fit_garch(e.head(250));
  GarchFilter filter(m, e.head(250));
  EXPECT_NEAR(filter.next_variance(), forecast_variance(m, e.head(250))(0), 1e-12);
  for (Eigen::Index t = 250; t < 300; ++t) filter.update(e(t));
  EXPECT_NEAR(filter.next_variance(), garch_variances(m, e)(300), 1e-9);
}

TEST(Garch, QuantileForecastIsGaussian) {
  const auto row = gaussian_quantile_forecast(10.0, 4.0);
  EXPECT_NEAR(row(49), 10.0, 1e-12);
  EXPECT_NEAR(row(94), 10.0 + 2.0 * 1.6448536269514727149, 1e-12);
  EXPECT_NEAR(row(4), 10.0 - 2.0 * 1.6448536269514727149, 1e-12);
}

TEST(Garch, ModelFileRoundTrip) {
  GarchModel a;
  a.hour = 5;
  a.omega = 0.123456789;
  a.alpha = 0.05;
  a.beta = 0.9;
  a.initial_variance = 3.25;
  std::stringstream ss;
  write_garch_models({a}, ss);
  const auto back = read_garch_models(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].hour, 5);
  EXPECT_EQ(back[0].omega, a.omega);
  EXPECT_EQ(back[0].initial_variance, a.initial_variance);
}
