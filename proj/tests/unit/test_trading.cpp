#include "probcast/trading.hpp"

#include "../support/trading_oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::trading;

namespace {

DayIntervals flat_bounds(int hours, double lower, double upper) {
  return {Vector::Constant(hours, lower), Vector::Constant(hours, upper)};
}

Matrix random_prices(int days, std::mt19937_64& rng, int hours = kHours) {
  std::normal_distribution<double> n01;
  Matrix p(days, hours);
  for (int d = 0; d < days; ++d) {
    for (int h = 0; h < hours; ++h) {
      p(d, h) = 50.0 + 20.0 * std::sin(h / 3.8) + 12.0 * n01(rng);
    }
  }
  return p;
}

std::vector<dist::QuantileForecast> noisy_forecasts(const Matrix& actual, double sd,
                                                    std::mt19937_64& rng, Matrix& point) {
  std::normal_distribution<double> n01;
  std::vector<dist::QuantileForecast> out;
  point.resize(actual.rows(), kHours);
  for (Eigen::Index d = 0; d < actual.rows(); ++d) {
    dist::QuantileForecast qf;
    qf.day = Date::from_ymd(2023, 4, 1) + static_cast<int>(d);
    for (int h = 0; h < kHours; ++h) {
      point(d, h) = actual(d, h) + sd * n01(rng);
      qf.values.row(h) = dist::gaussian_quantile_row(point(d, h), sd * sd);
    }
    out.push_back(qf);
  }
  return out;
}

}  // namespace

TEST(Plan, ChargeOneInequality) {
  BatteryParams bp;
  Vector point = Vector::Constant(4, 50.0);
  point(1) = 90.0;  // sell hour
  point(2) = 10.0;  // buy hour
  DayIntervals b = flat_bounds(4, 0.0, 0.0);
  b.lower(1) = 100.0;
  b.upper(2) = 80.0;
  DayPlan plan = plan_day(point, b, 1, bp);
  EXPECT_NEAR(*plan.condition_lhs, 1.1111111111111, 1e-10);
  EXPECT_TRUE(plan.condition_held);
  ASSERT_EQ(plan.orders.size(), 2u);
  EXPECT_EQ(plan.orders[0].side, Side::kSell);
  EXPECT_EQ(*plan.orders[0].limit, 100.0);
  EXPECT_EQ(*plan.orders[1].limit, 80.0);

  b.lower(1) = 90.0;
  b.upper(2) = 85.0;
  plan = plan_day(point, b, 1, bp);
  EXPECT_FALSE(plan.condition_held);
  EXPECT_TRUE(plan.orders.empty());
}

TEST(Settle, LimitSellFillsAtClearingPrice) {
  BatteryParams bp;
  DayPlan plan;
  plan.orders = {{7, Side::kSell, 50.0}};
  Vector actual = Vector::Constant(kHours, 10.0);
  actual(7) = 55.0;
  const auto s = settle_day(plan, Date::from_ymd(2023, 1, 1), actual, 1, bp);
  ASSERT_EQ(s.trades.size(), 1u);
  EXPECT_DOUBLE_EQ(s.cash, 49.5);
  EXPECT_EQ(s.charge, 0);
  actual(7) = 49.99;
  EXPECT_TRUE(settle_day(plan, Date::from_ymd(2023, 1, 1), actual, 1, bp).trades.empty());
}

TEST(Settle, LinkedPairNeedsBothFills) {
  BatteryParams bp;
  DayPlan plan;
  plan.linked = true;
  plan.orders = {{3, Side::kBuy, 20.0}, {18, Side::kSell, 60.0}};
  Vector actual = Vector::Constant(kHours, 40.0);
  actual(3) = 15.0;
  auto s = settle_day(plan, Date::from_ymd(2023, 1, 1), actual, 1, bp);
  EXPECT_TRUE(s.trades.empty());
  EXPECT_EQ(s.charge, 1);
  actual(18) = 70.0;
  s = settle_day(plan, Date::from_ymd(2023, 1, 1), actual, 1, bp);
  EXPECT_EQ(s.trades.size(), 2u);
  EXPECT_EQ(s.charge, 1);
}

TEST(PerfectForesight, TwoHourDay) {
  Matrix p(1, 2);
  p << 10.0, 100.0;
  EXPECT_NEAR(perfect_foresight(p), 78.888888888889, 1e-9);
  EXPECT_NEAR(single_cycle_profit(p.row(0).transpose(), 0.9), 78.888888888889, 1e-9);
}

TEST(PerfectForesight, ConstantPricesEarnNothing) {
  EXPECT_DOUBLE_EQ(perfect_foresight(Matrix::Constant(5, kHours, 42.0)), 0.0);
}

TEST(PerfectForesight, MatchesExhaustiveSearchOnShortPaths) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 20; ++t) {
    const Matrix p = random_prices(3, rng, 8);
    EXPECT_EQ(perfect_foresight(p), oracle::exhaustive_foresight(p, 0.9));
  }
}

TEST(Backtest, NeverBeatsPerfectForesight) {
  std::mt19937_64 rng(21);
  BatteryParams bp;
  for (int t = 0; t < 10; ++t) {
    const Matrix actual = random_prices(5, rng);
    Matrix point;
    const auto fs = noisy_forecasts(actual, 6.0, rng, point);
    const double pf = perfect_foresight(actual, bp);
    for (int level : {10, 50, 90}) {
      const auto ledger = backtest(fs, point, actual, level, bp);
      EXPECT_LE(ledger.total_profit, pf + 1e-9);
      ASSERT_EQ(ledger.battery.size(), 5u);
      EXPECT_EQ(ledger.battery.back(), 1);
      for (int c : ledger.battery) {
        EXPECT_GE(c, 0);
        EXPECT_LE(c, 2);
      }
      if (ledger.trade_count() > 0) {
        EXPECT_NEAR(ledger.per_transaction_profit * ledger.trade_count(), ledger.total_profit,
                    1e-9 * (1.0 + std::abs(ledger.total_profit)));
      }
    }
    std::vector<Date> days;
    for (const auto& f : fs) days.push_back(f.day);
    EXPECT_LE(fixed_hours_backtest(days, actual, bp).total_profit, pf + 1e-9);
    EXPECT_LE(unlimited_backtest(days, point, actual, bp).total_profit, pf + 1e-9);
    EXPECT_EQ(unlimited_backtest(days, point, actual, bp).battery.back(), 1);
  }
}

TEST(Backtest, PerfectForecastsTradeOnTheRightHours) {
  Matrix actual = Matrix::Constant(2, kHours, 50.0);
  actual(0, 4) = 10.0;
  actual(0, 19) = 120.0;
  actual(1, 2) = 15.0;
  actual(1, 20) = 110.0;
  Matrix point = actual;
  std::vector<dist::QuantileForecast> fs(2);
  for (int d = 0; d < 2; ++d) {
    fs[d].day = Date::from_ymd(2023, 4, 1) + d;
    for (int q = 0; q < kPercentiles; ++q) fs[d].values.col(q) = actual.row(d).transpose();
  }
  const auto ledger = backtest(fs, point, actual, 50);
  EXPECT_EQ(ledger.trade_count(), 4);
  EXPECT_NEAR(ledger.total_profit, 0.9 * 120 - 10 / 0.9 + 0.9 * 110 - 15 / 0.9, 1e-9);
  std::ostringstream out;
  write_ledger_csv(ledger, out);
  EXPECT_NE(out.str().find("sell"), std::string::npos);
}

TEST(Backtest, RejectsMisalignedInput) {
  std::vector<dist::QuantileForecast> fs(2);
  fs[0].day = fs[1].day = Date::from_ymd(2023, 1, 1);
  const Matrix m = Matrix::Zero(2, kHours);
  EXPECT_THROW(backtest(fs, m, m, 50), DataError);
  EXPECT_THROW(backtest(fs, m, Matrix::Zero(1, kHours), 50), DataError);
}
