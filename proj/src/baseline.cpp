#include "probcast/baseline.hpp"

#include "probcast/distribution.hpp"

#include <cmath>

namespace probcast::baseline {

Date naive_reference_day(Date day) {
  const int wd = day.weekday();  // 0 = Monday
  return (wd >= 1 && wd <= 4) ? day - 1 : day - 7;
}

Vector naive_forecast(const std::map<Date, data::DailyProfile>& profiles, Date day) {
  const Date ref = naive_reference_day(day);
  const auto it = profiles.find(ref);
  if (it == profiles.end()) {
    throw DataError("naive forecast for " + day.to_string() + ": reference day " +
                    ref.to_string() + " missing");
  }
  Vector out(kHours);
  for (int h = 0; h < kHours; ++h) {
    out(h) = it->second.price[h];
    if (!std::isfinite(out(h))) {
      throw DataError("naive forecast for " + day.to_string() + ": reference day " +
                      ref.to_string() + " has a missing price");
    }
  }
  return out;
}

Vector naive_forecast(const data::DailyRow& row) {
  const int wd = row.date.weekday();
  const int offset = (wd >= 1 && wd <= 4) ? 0 : 3 * kHours;  // lag blocks: d-1, d-2, d-3, d-7
  return row.features.segment(offset, kHours);
}

HistoricalSimulation fit_hs(std::span<const double> errors, data::Split source) {
  if (errors.size() < 30) throw DataError("historical simulation needs at least 30 errors");
  double mean = 0.0;
  for (double e : errors) mean += e;
  mean /= static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / static_cast<double>(errors.size()));
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw DataError("historical simulation: errors have zero variance");
  }
  return {mean, sd, source};
}

Eigen::Matrix<double, 1, kPercentiles> hs_quantiles(double point, const HistoricalSimulation& hs) {
  return dist::gaussian_quantile_row(point + hs.error_mean, hs.error_std * hs.error_std);
}

}  // namespace probcast::baseline
