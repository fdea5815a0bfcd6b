#pragma once

#include "probcast/common.hpp"
#include "probcast/distribution.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace probcast::trading {

struct BatteryParams {
  double efficiency = 0.9;  // xi: sells credit xi * price, buys cost price / xi
  int capacity = 2;         // MWh
  int initial_charge = 1;   // MWh; also the required final charge
};

enum class Side { kBuy, kSell };
std::string to_string(Side side);

struct Order {
  int hour = 0;
  Side side = Side::kBuy;
  std::optional<double> limit;  // unset: unlimited
};

struct DayPlan {
  std::vector<Order> orders;
  int start_charge = 1;
  /// Left and right side of the profitability inequality that was checked
  /// (unset when none applies).
  std::optional<double> condition_lhs;
  std::optional<double> condition_rhs;
  bool condition_held = false;
  /// On the final day a charge-1 pair executes only if both limits are crossed.
  bool linked = false;
};

struct Trade {
  Date date;
  int hour = 0;
  Side side = Side::kBuy;
  std::optional<double> limit;
  double price = 0.0;
  double cash = 0.0;
  int battery_after = 0;
};

struct TradeLedger {
  std::vector<Trade> trades;
  std::vector<int> battery;  // charge at the end of each day
  double total_profit = 0.0;
  double per_transaction_profit = 0.0;
  int profitable_limit_days = 0;

  int trade_count() const { return static_cast<int>(trades.size()); }
};

/// Interval bounds at `level` from one day of quantiles.
struct DayIntervals {
  Vector lower;
  Vector upper;
};
DayIntervals day_intervals(const dist::QuantileForecast& qf, int level);

/// Earliest hour of the maximum / minimum.
int argmax_hour(const Eigen::Ref<const Vector>& v);
int argmin_hour(const Eigen::Ref<const Vector>& v);

/// Orders for one day from the point forecast and interval bounds.
DayPlan plan_day(const Eigen::Ref<const Vector>& point, const DayIntervals& bounds, int charge,
                 const BatteryParams& params, bool last_day = false);

struct Settlement {
  double cash = 0.0;
  int charge = 0;
  std::vector<Trade> trades;
};

/// Auction fills at the clearing price: limit sells fill iff price >= limit,
/// limit buys iff price <= limit, unlimited orders always.
Settlement settle_day(const DayPlan& plan, Date date, const Eigen::Ref<const Vector>& actual,
                      int charge, const BatteryParams& params);

/// Quantile-based strategy over consecutive days. `point` and `actual` have
/// one row per forecast.
TradeLedger backtest(std::span<const dist::QuantileForecast> forecasts,
                     const Eigen::Ref<const Matrix>& point, const Eigen::Ref<const Matrix>& actual,
                     int level, const BatteryParams& params = {});

/// Unlimited daily buy at `buy_hour`, sell at `sell_hour`.
TradeLedger fixed_hours_backtest(std::span<const Date> days, const Eigen::Ref<const Matrix>& actual,
                                 const BatteryParams& params = {}, int buy_hour = 3,
                                 int sell_hour = 19);

/// Unlimited daily orders at the forecast argmin / argmax.
TradeLedger unlimited_backtest(std::span<const Date> days, const Eigen::Ref<const Matrix>& point,
                               const Eigen::Ref<const Matrix>& actual,
                               const BatteryParams& params = {});

/// Best single buy/sell pair on distinct hours: max xi p_s - p_b / xi.
double single_cycle_profit(const Eigen::Ref<const Vector>& prices, double efficiency);

/// Upper bound: dynamic programme over charges {0, 1, 2} with the day action
/// sets the strategy can realize, ending at the initial charge. Any number of
/// hours per day (columns) is accepted.
double perfect_foresight(const Eigen::Ref<const Matrix>& actual, const BatteryParams& params = {});

void write_ledger_csv(const TradeLedger& ledger, std::ostream& out);

}  // namespace probcast::trading
