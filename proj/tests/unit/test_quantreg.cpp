#include "probcast/quantreg.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::quantreg;

TEST(QuantileRegression, MatchesLinearProgramOnFivePoints) {
  Matrix x(5, 2);
  x << 0.5, 1.0, 1.5, -0.3, 2.0, 0.7, -0.4, 2.2, 1.1, 1.9;
  Vector y(5);
  y << 1.0, 2.1, 2.9, 0.4, 3.3;
  // Optimum from an LP solver.
  const QraModel m = fit_quantile(x, y, 30.0);
  EXPECT_NEAR(m.objective, 0.4247058823529408, 1e-10);
  EXPECT_NEAR(m.intercept, -0.21568627450980393, 1e-7);
  EXPECT_NEAR(m.weights(0), 1.3725490196078431, 1e-7);
  EXPECT_NEAR(m.weights(1), 0.5294117647058824, 1e-7);
  EXPECT_NEAR(pinball_objective(m.intercept, m.weights, x, y, 0.3), m.objective, 1e-12);
}

TEST(QuantileRegression, ConstantTargetGivesZeroLoss) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  Matrix x(30, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  const Vector y = Vector::Constant(30, 7.5);
  for (double q : {10.0, 50.0, 90.0}) {
    const QraModel m = fit_quantile(x, y, q);
    EXPECT_NEAR(m.objective, 0.0, 1e-9);
    EXPECT_NEAR(m.intercept, 7.5, 1e-8);
    EXPECT_NEAR(m.weights.cwiseAbs().maxCoeff(), 0.0, 1e-8);
  }
}

TEST(QuantileRegression, NoSampledPointBeatsTheFit) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x(40, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
    Vector y = (x.col(0) - 0.5 * x.col(1)).array() + 1.0;
    for (auto& v : y) v += n01(rng);
    const double tau = 0.1 + 0.08 * trial;
    const QraModel m = fit_quantile(x, y, 100.0 * tau);
    for (int k = 0; k < 50; ++k) {
      Vector w = m.weights;
      for (auto& v : w) v += 0.05 * n01(rng);
      EXPECT_GE(pinball_objective(m.intercept + 0.05 * n01(rng), w, x, y, tau), m.objective - 1e-9);
    }
  }
}

TEST(QuantileRegression, BadInputs) {
  Matrix x = Matrix::Random(10, 2);
  Vector y = Vector::Random(10);
  EXPECT_THROW(fit_quantile(x, y, 0.0), ConfigError);
  EXPECT_THROW(fit_quantile(x, y, 100.0), ConfigError);
  EXPECT_THROW(fit_quantile(x.topRows(3), y.head(3), 50.0), DataError);
}

namespace {

std::vector<linear::LearEnsembleForecast> members(int days, std::mt19937_64& rng, Matrix& actual) {
  std::normal_distribution<double> n01;
  std::vector<linear::LearEnsembleForecast> out;
  actual.resize(days, kHours);
  for (int d = 0; d < days; ++d) {
    linear::LearEnsembleForecast f;
    f.day = Date::from_ymd(2022, 5, 1) + d;
    f.windows = {56, 84};
    f.members = Matrix(kHours, 2);
    for (int h = 0; h < kHours; ++h) {
      const double level = 40.0 + 10.0 * n01(rng);
      f.members(h, 0) = level + n01(rng);
      f.members(h, 1) = level + n01(rng);
      actual(d, h) = level + 3.0 * n01(rng);
    }
    f.mean = f.members.rowwise().mean();
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST(Qra, ForecastIsSortedAndCoverageRoughlyRight) {
  std::mt19937_64 rng(3);
  Matrix actual;
  const auto cal = members(60, rng, actual);
  const auto models = fit_qra(cal, actual);
  ASSERT_EQ(models.size(), static_cast<std::size_t>(kHours));
  Matrix test_actual;
  const auto test = members(40, rng, test_actual);
  int inside = 0;
  for (std::size_t d = 0; d < test.size(); ++d) {
    const auto qf = qra_forecast(models, test[d]);
    EXPECT_TRUE(qf.monotone());
    EXPECT_EQ(qf.day, test[d].day);
    for (int h = 0; h < kHours; ++h) {
      const double y = test_actual(static_cast<Eigen::Index>(d), h);
      inside += (y >= qf.at(h, 10) && y <= qf.at(h, 90));
    }
  }
  const double rate = inside / (40.0 * kHours);
  EXPECT_GT(rate, 0.7);
  EXPECT_LT(rate, 0.9);
}

TEST(Qra, ModelFileRoundTrip) {
  std::mt19937_64 rng(5);
  Matrix actual;
  const auto cal = members(20, rng, actual);
  const auto models = fit_qra(cal, actual);
  std::stringstream ss;
  write_qra_models(models, ss);
  const auto back = read_qra_models(ss);
  ASSERT_EQ(back.size(), models.size());
  for (int h : {0, 13, 23}) {
    for (int q : {0, 49, 98}) {
      EXPECT_EQ(back[h][q].intercept, models[h][q].intercept);
      EXPECT_EQ(back[h][q].weights, models[h][q].weights);
    }
  }
  const auto a = qra_forecast(models, cal[3]);
  const auto b = qra_forecast(back, cal[3]);
  EXPECT_EQ(a.values, b.values);
}
