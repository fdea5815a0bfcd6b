#pragma once

#include "probcast/common.hpp"
#include "probcast/distribution.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace probcast::metrics {

/// Even levels 2, 4, ..., 98 (percent).
std::vector<int> level_grid();

struct PointErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

/// Over all (day, hour) cells; shapes must agree.
PointErrors mae_rmse(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& actual);

/// Central intervals at `level` percent: L = percentile (100 - level) / 2,
/// U = percentile (100 + level) / 2. Rows are days, columns hours.
struct IntervalSet {
  int level = 0;
  Matrix lower;
  Matrix upper;
};

IntervalSet intervals(std::span<const dist::QuantileForecast> forecasts, int level);

/// Percentage of actuals inside the closed interval [L, U].
double picp(const IntervalSet& set, const Eigen::Ref<const Matrix>& actual);
/// Mean of U - L.
double mpiw(const IntervalSet& set);

/// Mean |PICP - level| over the 2:98:2 grid; every level must be present.
double maace(const std::map<int, double>& picp_by_level);

/// Pinball loss of quantile `value` at probability tau for outcome y.
double pinball(double value, double y, double tau);
/// (1/99) sum_q pinball over the 99-point grid for one cell.
double crps_cell(const Eigen::Ref<const Eigen::RowVectorXd>& quantiles, double y);
/// Mean over the 24 hours of one day.
double crps_day(const dist::QuantileForecast& qf, const Eigen::Ref<const Vector>& actual);
/// Daily CRPS series for the DM test; rows of `actual` align with `forecasts`.
Vector daily_crps(std::span<const dist::QuantileForecast> forecasts,
                  const Eigen::Ref<const Matrix>& actual);
/// Mean over all cells.
double crps(std::span<const dist::QuantileForecast> forecasts, const Eigen::Ref<const Matrix>& actual);

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double crps = 0.0;
  double maace = 0.0;
  std::map<int, double> picp;  // level -> percent
  std::map<int, double> mpiw;  // level -> EUR/MWh
};

/// Full report. `point` may be empty, in which case the median is used.
MetricsReport evaluate(std::span<const dist::QuantileForecast> forecasts,
                       const Eigen::Ref<const Matrix>& point, const Eigen::Ref<const Matrix>& actual);

struct DmResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double mean_difference = 0.0;
  int lag = 0;
  bool degenerate = false;  // zero variance with a nonzero mean: statistic is +-inf
};

/// Diebold-Mariano on d_t = loss_a - loss_b with a Bartlett (Newey-West)
/// variance of the mean at lag floor(T^(1/3)); two-sided normal p-value.
DmResult dm_test(const Eigen::Ref<const Vector>& loss_a, const Eigen::Ref<const Vector>& loss_b);

struct DmMatrix {
  std::vector<std::string> names;
  Matrix statistic;  // (i, j) = dm(i, j); antisymmetric
  Matrix p_value;    // symmetric, diagonal 1
};

DmMatrix dm_matrix(const std::vector<std::string>& names, const std::vector<Vector>& losses);

void write_dm_matrix(const DmMatrix& m, bool p_values, std::ostream& out);

}  // namespace probcast::metrics
