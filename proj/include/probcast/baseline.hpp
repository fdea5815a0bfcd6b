#pragma once

#include "probcast/common.hpp"
#include "probcast/data.hpp"

#include <map>
#include <span>

namespace probcast::baseline {

/// Reference day of the naive model: d-1 for Tuesday to Friday, d-7 for
/// Monday, Saturday and Sunday.
Date naive_reference_day(Date day);

/// Prices of the reference day. Throws DataError when it is missing or
/// incomplete.
Vector naive_forecast(const std::map<Date, data::DailyProfile>& profiles, Date day);

/// Same rule read off an unstandardized feature row (lag blocks d-1 and d-7).
Vector naive_forecast(const data::DailyRow& row);

/// Gaussian fitted to naive forecast errors.
struct HistoricalSimulation {
  double error_mean = 0.0;
  double error_std = 1.0;
  data::Split source_split = data::Split::kTrain;
};

/// Population mean and standard deviation of at least 30 errors.
HistoricalSimulation fit_hs(std::span<const double> errors,
                            data::Split source = data::Split::kTrain);

/// point + error_mean + error_std * Phi^-1(q / 100), q = 1..99.
Eigen::Matrix<double, 1, kPercentiles> hs_quantiles(double point, const HistoricalSimulation& hs);

}  // namespace probcast::baseline
