#pragma once

#include "probcast/common.hpp"
#include "probcast/date.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace probcast::dist {

/// Percentiles 1..99 for each of the 24 delivery hours of one day. This is
/// the interchange format every model emits and every metric consumes.
struct QuantileForecast {
  Date day;
  Matrix values = Matrix::Zero(kHours, kPercentiles);  // row = hour, col = percentile - 1

  double at(int hour, int percentile) const { return values(hour, percentile - 1); }
  bool monotone() const;
  /// Per-hour ascending sort; repairs quantile crossing.
  void sort_hours();
};

/// Quantile values for percentiles 1..99 of N(mean, variance).
Eigen::Matrix<double, 1, kPercentiles> gaussian_quantile_row(double mean, double variance);

/// Weighted Gaussian mixture; weights sum to one.
struct MixtureDistribution {
  Vector weights;
  Vector means;
  Vector stddevs;

  Eigen::Index size() const { return weights.size(); }
  double mean() const { return weights.dot(means); }
  /// Throws DataError when weights are negative, do not sum to one within
  /// 1e-12, or a standard deviation is not positive.
  void validate() const;

  static MixtureDistribution equal_weights(const Vector& means, const Vector& stddevs);
  static MixtureDistribution single(double mean, double stddev);
};

double mixture_cdf(const MixtureDistribution& mix, double x);
double mixture_pdf(const MixtureDistribution& mix, double x);

/// Weighted average of component quantiles; the root finder's first guess.
double mixture_quantile_initial_guess(const MixtureDistribution& mix, double p);

/// Solves F(x) = p by a bracketed Brent iteration seeded at the weighted
/// component-quantile average. |F(x) - p| < 1e-8 on return.
double mixture_quantile(const MixtureDistribution& mix, double p);

/// Model outputs accepted by to_quantile_forecast.
struct GaussianOutput {
  Vector mean;      // kHours
  Vector variance;  // kHours, > 0
};
struct MixtureOutput {
  std::vector<MixtureDistribution> hours;  // kHours
};
struct ExplicitQuantiles {
  Matrix values;  // kHours x kPercentiles
};
using ModelOutput = std::variant<GaussianOutput, MixtureOutput, ExplicitQuantiles>;

QuantileForecast to_quantile_forecast(Date day, const ModelOutput& source);

/// CSV rows (date, hour, q01..q99).
void write_quantile_csv(const std::vector<QuantileForecast>& forecasts, std::ostream& out);
std::vector<QuantileForecast> read_quantile_csv(std::istream& in,
                                                const std::string& source_name = "<stream>");

}  // namespace probcast::dist
