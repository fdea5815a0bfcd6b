#include "probcast/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::metrics;

namespace {

dist::QuantileForecast gaussian_day(Date day, double mean, double sd) {
  dist::QuantileForecast qf;
  qf.day = day;
  for (int h = 0; h < kHours; ++h) qf.values.row(h) = dist::gaussian_quantile_row(mean, sd * sd);
  return qf;
}

}  // namespace

TEST(PointErrors, TwoCells) {
  Matrix pred(1, 2), actual(1, 2);
  pred << 1.0, 5.0;
  actual << 1.0, 1.0;
  const auto e = mae_rmse(pred, actual);
  EXPECT_DOUBLE_EQ(e.mae, 2.0);
  EXPECT_DOUBLE_EQ(e.rmse, std::sqrt(8.0));
  EXPECT_THROW(mae_rmse(pred, Matrix::Zero(2, 2)), DataError);
}

TEST(Crps, PointMassIsHalfAbsoluteError) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 200; ++t) {
    const double yhat = 50.0 * n01(rng), y = 50.0 * n01(rng);
    const Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(kPercentiles, yhat);
    EXPECT_NEAR(crps_cell(row, y), 0.5 * std::abs(y - yhat), 1e-10);
  }
}

TEST(Crps, StandardNormalGridReference) {
  const Eigen::RowVectorXd row = dist::gaussian_quantile_row(0.0, 1.0);
  EXPECT_NEAR(crps_cell(row, 0.4), 0.14980297583568582523, 1e-13);
}

TEST(Crps, WideningAroundTheTruthCostsMore) {
  const Date d = Date::from_ymd(2023, 3, 1);
  const std::vector<dist::QuantileForecast> narrow{gaussian_day(d, 0.0, 1.0)};
  const std::vector<dist::QuantileForecast> wide{gaussian_day(d, 0.0, 3.0)};
  const Matrix actual = Matrix::Zero(1, kHours);
  EXPECT_LT(crps(narrow, actual), crps(wide, actual));
  EXPECT_EQ(daily_crps(narrow, actual).size(), 1);
}

TEST(Pinball, Asymmetry) {
  EXPECT_DOUBLE_EQ(pinball(1.0, 3.0, 0.9), 0.9 * 2.0);
  EXPECT_DOUBLE_EQ(pinball(3.0, 1.0, 0.9), 0.1 * 2.0);
}

TEST(Intervals, PicpMpiwAndSaturatedMaace) {
  std::vector<dist::QuantileForecast> fs;
  const Date d = Date::from_ymd(2023, 3, 1);
  for (int i = 0; i < 3; ++i) fs.push_back(gaussian_day(d + i, 0.0, 1e6));
  const Matrix actual = Matrix::Zero(3, kHours);
  std::map<int, double> by_level;
  for (int level : level_grid()) {
    const auto set = intervals(fs, level);
    by_level[level] = picp(set, actual);
    EXPECT_EQ(by_level[level], 100.0);
  }
  EXPECT_DOUBLE_EQ(maace(by_level), 50.0);
  const auto set = intervals(fs, 90);
  EXPECT_NEAR(mpiw(set), 2.0 * 1.6448536269514727149e6, 1e-3);
  EXPECT_EQ(level_grid().size(), 49u);
  EXPECT_THROW(intervals(fs, 91), ConfigError);
  by_level.erase(50);
  EXPECT_THROW(maace(by_level), DataError);
}

TEST(Intervals, ClosedBoundsCountAsInside) {
  dist::QuantileForecast qf;
  qf.day = Date::from_ymd(2023, 3, 1);
  for (int q = 0; q < kPercentiles; ++q) qf.values.col(q).setConstant(q + 1.0);
  const std::vector<dist::QuantileForecast> fs{qf};
  Matrix actual = Matrix::Constant(1, kHours, 5.0);  // lower bound of the 90% interval
  EXPECT_EQ(picp(intervals(fs, 90), actual), 100.0);
  actual.setConstant(4.999);
  EXPECT_EQ(picp(intervals(fs, 90), actual), 0.0);
}

TEST(DieboldMariano, ReferenceValue) {
  Vector a(12), b(12);
  a << 1.2, 0.8, 1.5, 1.1, 0.9, 1.4, 1.3, 0.7, 1.0, 1.6, 1.2, 0.95;
  b << 1.0, 0.9, 1.1, 1.0, 1.0, 1.2, 1.1, 0.8, 0.9, 1.3, 1.0, 1.0;
  const auto r = dm_test(a, b);
  EXPECT_EQ(r.lag, 2);
  EXPECT_NEAR(r.statistic, 5.0649737357938502335, 1e-10);
  EXPECT_NEAR(r.p_value, 4.0845666120425702486e-7, 1e-15);
}

TEST(DieboldMariano, IdenticalAndAntisymmetric) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  Vector a(50);
  for (auto& v : a) v = std::abs(n01(rng));
  const auto same = dm_test(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  for (int t = 0; t < 30; ++t) {
    Vector b(50);
    for (auto& v : b) v = std::abs(n01(rng));
    const auto ab = dm_test(a, b), ba = dm_test(b, a);
    EXPECT_NEAR(ab.statistic, -ba.statistic, 1e-12);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
  }
}

TEST(DieboldMariano, MatrixIsAntisymmetric) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  std::vector<Vector> losses(3, Vector(40));
  for (auto& l : losses) for (auto& v : l) v = std::abs(n01(rng));
  const auto m = dm_matrix({"A", "B", "C"}, losses);
  EXPECT_NEAR((m.statistic + m.statistic.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_EQ(m.p_value.diagonal(), Vector::Ones(3));
  std::ostringstream out;
  write_dm_matrix(m, true, out);
  EXPECT_NE(out.str().find("A"), std::string::npos);
}

TEST(Evaluate, UsesMedianWhenNoPointGiven) {
  const Date d = Date::from_ymd(2023, 3, 1);
  const std::vector<dist::QuantileForecast> fs{gaussian_day(d, 10.0, 2.0)};
  const Matrix actual = Matrix::Constant(1, kHours, 12.0);
  const auto r = evaluate(fs, Matrix(), actual);
  EXPECT_NEAR(r.mae, 2.0, 1e-12);
  EXPECT_EQ(r.picp.size(), 49u);
  EXPECT_GT(r.crps, 0.0);
}
