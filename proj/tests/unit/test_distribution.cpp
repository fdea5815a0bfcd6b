#include "probcast/distribution.hpp"
#include "probcast/normal.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::dist;

namespace {

MixtureDistribution two_component() {
  MixtureDistribution m;
  m.weights = Vector(2);
  m.means = Vector(2);
  m.stddevs = Vector(2);
  m.weights << 0.3, 0.7;
  m.means << -1.0, 2.0;
  m.stddevs << 0.5, 1.5;
  return m;
}

}  // namespace

TEST(Normal, QuantileReferenceValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.9599639845400542355, 4e-15);
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514727149, 4e-15);
  EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
  for (double p : {1e-10, 0.01, 0.3, 0.77, 0.999}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
}

TEST(Mixture, ReferenceValues) {
  const auto m = two_component();
  EXPECT_NEAR(mixture_cdf(m, 0.7), 0.43504255721963178606, 1e-14);
  const std::pair<double, double> q[] = {{0.01, -1.9872141609564691009},
                                         {0.1, -1.2638637107991904431},
                                         {0.5, 1.1510927598840407563},
                                         {0.9, 3.6013557858172125641},
                                         {0.99, 5.2840246332831265749}};
  for (const auto& [p, x] : q) EXPECT_NEAR(mixture_quantile(m, p), x, 1e-8) << p;
}

TEST(Mixture, SymmetricPairHasMedianInTheMiddle) {
  Vector mu(2), sd(2);
  mu << 0.0, 10.0;
  sd << 1.0, 1.0;
  const auto m = MixtureDistribution::equal_weights(mu, sd);
  EXPECT_NEAR(mixture_cdf(m, 5.0), 0.5, 1e-15);
  EXPECT_NEAR(mixture_quantile(m, 0.5), 5.0, 1e-8);
  EXPECT_DOUBLE_EQ(m.mean(), 5.0);
}

TEST(Mixture, SingleComponentIsGaussian) {
  const auto m = MixtureDistribution::single(3.0, 2.0);
  EXPECT_NEAR(mixture_quantile(m, 0.975), 3.0 + 2.0 * 1.9599639845400542355, 1e-8);
  EXPECT_NEAR(mixture_pdf(m, 3.0), normal_pdf(0.0) / 2.0, 1e-15);
}

TEST(Mixture, InversionPropertyOnRandomMixtures) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> count(1, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = count(rng);
    Vector w(n), mu(n), sd(n);
    for (int i = 0; i < n; ++i) {
      w(i) = u(rng) + 0.01;
      mu(i) = 100.0 * (u(rng) - 0.5);
      sd(i) = 0.1 + 20.0 * u(rng);
    }
    w /= w.sum();
    const MixtureDistribution m{w, mu, sd};
    double prev = -std::numeric_limits<double>::infinity();
    for (int q = 1; q <= 99; ++q) {
      const double x = mixture_quantile(m, q / 100.0);
      EXPECT_LT(std::abs(mixture_cdf(m, x) - q / 100.0), 1e-8);
      EXPECT_GE(x, prev);
      prev = x;
    }
  }
}

TEST(Mixture, ValidationRejectsBadComponents) {
  auto m = two_component();
  m.weights(0) = 0.4;
  EXPECT_THROW(m.validate(), DataError);
  m = two_component();
  m.stddevs(1) = 0.0;
  EXPECT_THROW(m.validate(), DataError);
}

TEST(QuantileForecast, ConversionsAreMonotone) {
  const Date day = Date::from_ymd(2024, 2, 29);
  GaussianOutput g{Vector::Constant(kHours, 40.0), Vector::Constant(kHours, 9.0)};
  const auto a = to_quantile_forecast(day, g);
  EXPECT_TRUE(a.monotone());
  EXPECT_NEAR(a.at(3, 50), 40.0, 1e-12);
  EXPECT_NEAR(a.at(3, 95), 40.0 + 3.0 * 1.6448536269514727149, 1e-12);

  MixtureOutput mo;
  for (int h = 0; h < kHours; ++h) mo.hours.push_back(two_component());
  const auto b = to_quantile_forecast(day, mo);
  EXPECT_TRUE(b.monotone());
  EXPECT_NEAR(b.at(0, 10), -1.2638637107991904431, 1e-8);

  ExplicitQuantiles e{Matrix::Zero(kHours, kPercentiles)};
  for (int q = 0; q < kPercentiles; ++q) e.values.col(q).setConstant(kPercentiles - q);
  const auto c = to_quantile_forecast(day, e);
  EXPECT_TRUE(c.monotone());  // crossing repaired by sorting
  EXPECT_EQ(c.at(0, 1), 1.0);
}

TEST(QuantileForecast, CsvRoundTrip) {
  std::vector<QuantileForecast> fs(2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (std::size_t i = 0; i < 2; ++i) {
    fs[i].day = Date::from_ymd(2023, 6, 1) + static_cast<int>(i);
    for (Eigen::Index k = 0; k < fs[i].values.size(); ++k) fs[i].values.data()[k] = 30.0 * n01(rng);
    fs[i].sort_hours();
  }
  std::stringstream ss;
  write_quantile_csv(fs, ss);
  const auto back = read_quantile_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].day, fs[1].day);
  EXPECT_EQ(back[1].values, fs[1].values);
}
