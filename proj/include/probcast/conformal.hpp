#pragma once

#include "probcast/common.hpp"

#include <deque>

namespace probcast::conformal {

inline constexpr int kDefaultCalibrationDays = 182;

/// |point - actual|.
double nonconformity(double point, double actual);

/// Most recent absolute residuals of one delivery hour, oldest first.
class ScoreWindow {
 public:
  explicit ScoreWindow(int capacity = kDefaultCalibrationDays, int hour = -1);

  /// Appends and evicts the oldest score beyond capacity. Throws on a
  /// negative or non-finite score.
  void roll(double score);

  int hour() const { return hour_; }
  int capacity() const { return capacity_; }
  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  const std::deque<double>& scores() const { return scores_; }

  /// Order statistic of rank ceil(alpha (n + 1)) clamped to [1, n].
  double quantile(double alpha) const;
  /// Same, with alpha = percent / 100 and the rank computed in exact integer
  /// arithmetic.
  double quantile_percent(int percent) const;

 private:
  int capacity_;
  int hour_;
  std::deque<double> scores_;
};

/// Percentiles 1..99 of the symmetric conformal band around `point`:
/// point - Q_{1-2q}(s) below the median, point + Q_{2q-1}(s) from it upward.
Eigen::Matrix<double, 1, kPercentiles> conformal_quantiles(double point, const ScoreWindow& window);

}  // namespace probcast::conformal
