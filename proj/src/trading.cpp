#include "probcast/trading.hpp"

#include "probcast/csv.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <ostream>

namespace probcast::trading {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sell_cash(double price, double xi) { return xi * price; }
double buy_cash(double price, double xi) { return -price / xi; }

void check_charge(int charge, const BatteryParams& p) {
  if (charge < 0 || charge > p.capacity) throw DataError("battery charge out of range");
}

TradeLedger finish(TradeLedger ledger) {
  // Day subtotals first, in the same order perfect_foresight adds them, so a
  // strategy that hits the optimum reproduces it bit for bit.
  ledger.total_profit = 0.0;
  for (std::size_t i = 0; i < ledger.trades.size();) {
    double day = 0.0;
    const Date date = ledger.trades[i].date;
    for (; i < ledger.trades.size() && ledger.trades[i].date == date; ++i) day += ledger.trades[i].cash;
    ledger.total_profit += day;
  }
  ledger.per_transaction_profit =
      ledger.trades.empty() ? 0.0 : ledger.total_profit / static_cast<double>(ledger.trades.size());
  return ledger;
}

// Best cash per end charge for one day, over the action sets of the strategy:
// charge 1 trades at most one sell and one buy; charge 2 sells once or twice
// and may buy once; charge 0 mirrors it.
std::array<double, 3> best_day(const Eigen::Ref<const Vector>& p, int charge, double xi) {
  using Roles = std::vector<Side>;
  std::vector<Roles> templates;
  switch (charge) {
    case 1:
      templates = {{}, {Side::kSell}, {Side::kBuy}, {Side::kSell, Side::kBuy}};
      break;
    case 2:
      templates = {{Side::kSell},
                   {Side::kSell, Side::kSell},
                   {Side::kSell, Side::kBuy},
                   {Side::kSell, Side::kSell, Side::kBuy}};
      break;
    default:
      templates = {{Side::kBuy},
                   {Side::kBuy, Side::kBuy},
                   {Side::kBuy, Side::kSell},
                   {Side::kBuy, Side::kBuy, Side::kSell}};
      break;
  }
  std::array<double, 3> best{kNegInf, kNegInf, kNegInf};
  const int hours = static_cast<int>(p.size());
  std::array<int, 3> h{};
  std::array<std::pair<int, Side>, 3> seq{};

  for (const Roles& roles : templates) {
    const int k = static_cast<int>(roles.size());
    auto evaluate = [&] {
      for (int i = 0; i < k; ++i) seq[i] = {h[i], roles[i]};
      std::sort(seq.begin(), seq.begin() + k);
      int c = charge;
      double cash = 0.0;
      for (int i = 0; i < k; ++i) {
        if (seq[i].second == Side::kSell) {
          if (--c < 0) return;
          cash += sell_cash(p(seq[i].first), xi);
        } else {
          if (++c > 2) return;
          cash += buy_cash(p(seq[i].first), xi);
        }
      }
      best[c] = std::max(best[c], cash);
    };
    if (k == 0) {
      evaluate();
      continue;
    }
    for (h[0] = 0; h[0] < hours; ++h[0]) {
      if (k == 1) {
        evaluate();
        continue;
      }
      for (h[1] = 0; h[1] < hours; ++h[1]) {
        if (h[1] == h[0]) continue;
        if (k == 2) {
          evaluate();
          continue;
        }
        for (h[2] = 0; h[2] < hours; ++h[2]) {
          if (h[2] == h[0] || h[2] == h[1]) continue;
          evaluate();
        }
      }
    }
  }
  return best;
}

}  // namespace

std::string to_string(Side side) { return side == Side::kBuy ? "buy" : "sell"; }

DayIntervals day_intervals(const dist::QuantileForecast& qf, int level) {
  if (level < 2 || level > 98 || level % 2 != 0) {
    throw ConfigError("trading level must be an even percentage in [2, 98]");
  }
  return {qf.values.col((100 - level) / 2 - 1), qf.values.col((100 + level) / 2 - 1)};
}

int argmax_hour(const Eigen::Ref<const Vector>& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

int argmin_hour(const Eigen::Ref<const Vector>& v) {
  Eigen::Index i = 0;
  v.minCoeff(&i);
  return static_cast<int>(i);
}

DayPlan plan_day(const Eigen::Ref<const Vector>& point, const DayIntervals& bounds, int charge,
                 const BatteryParams& params, bool last_day) {
  const Eigen::Index hours = point.size();
  if (hours < 2 || bounds.lower.size() != hours || bounds.upper.size() != hours ||
      !point.allFinite() || !bounds.lower.allFinite() || !bounds.upper.allFinite()) {
    throw DataError("plan_day: malformed forecast row");
  }
  check_charge(charge, params);
  const double xi = params.efficiency;
  DayPlan plan;
  plan.start_charge = charge;

  if (charge == 1) {
    const int hs = argmax_hour(point), hb = argmin_hour(point);
    plan.condition_lhs = xi * bounds.lower(hs) - bounds.upper(hb) / xi;
    plan.condition_rhs = 0.0;
    plan.condition_held = *plan.condition_lhs > 0.0 && hs != hb;
    if (plan.condition_held) {
      plan.orders = {{hs, Side::kSell, bounds.lower(hs)}, {hb, Side::kBuy, bounds.upper(hb)}};
      plan.linked = last_day;
    }
    return plan;
  }

  const bool full = charge == 2;
  const int fallback = full ? argmax_hour(point) : argmin_hour(point);
  const Side unilateral = full ? Side::kSell : Side::kBuy;
  if (last_day || hours < 3) {
    plan.orders = {{fallback, unilateral, std::nullopt}};
    return plan;
  }

  // Case full: unlimited sell at a, limit sell at b, limit buy at c with a < c.
  // Case empty: unlimited buy at a, limit buy at b, limit sell at c with a < c.
  double best = kNegInf;
  int ba = -1, bb = -1, bc = -1;
  for (int a = 0; a < hours; ++a) {
    for (int b = 0; b < hours; ++b) {
      if (b == a) continue;
      for (int c = a + 1; c < hours; ++c) {
        if (c == b) continue;
        const double v = full
            ? xi * point(a) + xi * point(b) - point(c) / xi
            : -point(a) / xi - point(b) / xi + xi * point(c);
        if (v > best) {
          best = v;
          ba = a;
          bb = b;
          bc = c;
        }
      }
    }
  }
  if (full) {
    plan.condition_lhs = xi * point(ba) + xi * bounds.lower(bb) - bounds.upper(bc) / xi;
    plan.condition_rhs = xi * point(fallback);
  } else {
    plan.condition_lhs = -point(ba) / xi + xi * bounds.lower(bc) - bounds.upper(bb) / xi;
    plan.condition_rhs = -point(fallback) / xi;
  }
  plan.condition_held = *plan.condition_lhs > *plan.condition_rhs;
  if (!plan.condition_held) {
    plan.orders = {{fallback, unilateral, std::nullopt}};
  } else if (full) {
    plan.orders = {{ba, Side::kSell, std::nullopt},
                   {bb, Side::kSell, bounds.lower(bb)},
                   {bc, Side::kBuy, bounds.upper(bc)}};
  } else {
    plan.orders = {{ba, Side::kBuy, std::nullopt},
                   {bb, Side::kBuy, bounds.upper(bb)},
                   {bc, Side::kSell, bounds.lower(bc)}};
  }
  return plan;
}

Settlement settle_day(const DayPlan& plan, Date date, const Eigen::Ref<const Vector>& actual,
                      int charge, const BatteryParams& params) {
  check_charge(charge, params);
  auto crosses = [&](const Order& o) {
    if (o.hour < 0 || o.hour >= actual.size()) {
      throw DataError("settle_day: order references hour " + std::to_string(o.hour) +
                      " outside the price row");
    }
    if (!o.limit) return true;
    const double price = actual(o.hour);
    return o.side == Side::kSell ? price >= *o.limit : price <= *o.limit;
  };
  std::vector<Order> orders = plan.orders;
  std::sort(orders.begin(), orders.end(),
            [](const Order& a, const Order& b) { return a.hour < b.hour; });
  bool all_cross = true;
  for (const auto& o : orders) all_cross = crosses(o) && all_cross;

  Settlement s;
  s.charge = charge;
  if (plan.linked && !all_cross) return s;
  for (const auto& o : orders) {
    if (!crosses(o)) continue;
    const int next = s.charge + (o.side == Side::kBuy ? 1 : -1);
    if (next < 0 || next > params.capacity) continue;
    const double price = actual(o.hour);
    const double cash = o.side == Side::kSell ? sell_cash(price, params.efficiency)
                                              : buy_cash(price, params.efficiency);
    s.charge = next;
    s.cash += cash;
    s.trades.push_back({date, o.hour, o.side, o.limit, price, cash, next});
  }
  return s;
}

TradeLedger backtest(std::span<const dist::QuantileForecast> forecasts,
                     const Eigen::Ref<const Matrix>& point, const Eigen::Ref<const Matrix>& actual,
                     int level, const BatteryParams& params) {
  const auto n = static_cast<Eigen::Index>(forecasts.size());
  if (point.rows() != n || actual.rows() != n || point.cols() != kHours || actual.cols() != kHours) {
    throw DataError("backtest: forecasts, point forecasts and prices are not aligned day by day");
  }
  for (Eigen::Index d = 1; d < n; ++d) {
    if (!(forecasts[static_cast<std::size_t>(d - 1)].day < forecasts[static_cast<std::size_t>(d)].day)) {
      throw DataError("backtest: forecast days must be strictly increasing");
    }
  }
  TradeLedger ledger;
  int charge = params.initial_charge;
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto& qf = forecasts[static_cast<std::size_t>(d)];
    const DayPlan plan = plan_day(point.row(d).transpose(), day_intervals(qf, level), charge, params,
                                  d == n - 1);
    if (plan.condition_held) ++ledger.profitable_limit_days;
    Settlement s = settle_day(plan, qf.day, actual.row(d).transpose(), charge, params);
    charge = s.charge;
    for (auto& t : s.trades) ledger.trades.push_back(std::move(t));
    ledger.battery.push_back(charge);
  }
  return finish(std::move(ledger));
}

TradeLedger fixed_hours_backtest(std::span<const Date> days, const Eigen::Ref<const Matrix>& actual,
                                 const BatteryParams& params, int buy_hour, int sell_hour) {
  if (actual.rows() != static_cast<Eigen::Index>(days.size())) {
    throw DataError("fixed-hours backtest: days and prices misaligned");
  }
  if (buy_hour == sell_hour || buy_hour < 0 || sell_hour < 0 || buy_hour >= actual.cols() ||
      sell_hour >= actual.cols()) {
    throw ConfigError("fixed-hours backtest: invalid hours");
  }
  TradeLedger ledger;
  for (Eigen::Index d = 0; d < actual.rows(); ++d) {
    DayPlan plan;
    plan.orders = {{buy_hour, Side::kBuy, std::nullopt}, {sell_hour, Side::kSell, std::nullopt}};
    Settlement s = settle_day(plan, days[static_cast<std::size_t>(d)], actual.row(d).transpose(),
                              params.initial_charge, params);
    for (auto& t : s.trades) ledger.trades.push_back(std::move(t));
    ledger.battery.push_back(s.charge);
  }
  return finish(std::move(ledger));
}

TradeLedger unlimited_backtest(std::span<const Date> days, const Eigen::Ref<const Matrix>& point,
                               const Eigen::Ref<const Matrix>& actual, const BatteryParams& params) {
  if (actual.rows() != static_cast<Eigen::Index>(days.size()) || point.rows() != actual.rows() ||
      point.cols() != actual.cols()) {
    throw DataError("unlimited backtest: days, forecasts and prices misaligned");
  }
  TradeLedger ledger;
  for (Eigen::Index d = 0; d < actual.rows(); ++d) {
    const Vector p = point.row(d).transpose();
    const int hs = argmax_hour(p), hb = argmin_hour(p);
    DayPlan plan;
    if (hs != hb) plan.orders = {{hb, Side::kBuy, std::nullopt}, {hs, Side::kSell, std::nullopt}};
    Settlement s = settle_day(plan, days[static_cast<std::size_t>(d)], actual.row(d).transpose(),
                              params.initial_charge, params);
    for (auto& t : s.trades) ledger.trades.push_back(std::move(t));
    ledger.battery.push_back(s.charge);
  }
  return finish(std::move(ledger));
}

double single_cycle_profit(const Eigen::Ref<const Vector>& prices, double efficiency) {
  if (prices.size() < 2) throw DataError("single-cycle profit needs two hours");
  double best = kNegInf;
  for (Eigen::Index s = 0; s < prices.size(); ++s) {
    for (Eigen::Index b = 0; b < prices.size(); ++b) {
      if (s != b) best = std::max(best, sell_cash(prices(s), efficiency) + buy_cash(prices(b), efficiency));
    }
  }
  return best;
}

double perfect_foresight(const Eigen::Ref<const Matrix>& actual, const BatteryParams& params) {
  if (params.capacity != 2) throw ConfigError("perfect foresight supports a 2 MWh battery only");
  check_charge(params.initial_charge, params);
  std::array<double, 3> value{kNegInf, kNegInf, kNegInf};
  value[static_cast<std::size_t>(params.initial_charge)] = 0.0;
  for (Eigen::Index d = 0; d < actual.rows(); ++d) {
    std::array<double, 3> next{kNegInf, kNegInf, kNegInf};
    for (int c = 0; c < 3; ++c) {
      if (value[c] == kNegInf) continue;
      const auto day = best_day(actual.row(d).transpose(), c, params.efficiency);
      for (int e = 0; e < 3; ++e) {
        if (day[e] != kNegInf) next[e] = std::max(next[e], value[c] + day[e]);
      }
    }
    value = next;
  }
  return value[static_cast<std::size_t>(params.initial_charge)];
}

void write_ledger_csv(const TradeLedger& ledger, std::ostream& out) {
  out << "date,hour,side,limit,fill_price,cash,battery_after\n";
  for (const auto& t : ledger.trades) {
    out << t.date.to_string() << ',' << t.hour << ',' << to_string(t.side) << ','
        << (t.limit ? csv::format_number(*t.limit) : std::string()) << ','
        << csv::format_number(t.price) << ',' << csv::format_number(t.cash) << ','
        << t.battery_after << '\n';
  }
}

}  // namespace probcast::trading
