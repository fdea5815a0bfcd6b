#include "probcast/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace probcast::conformal {

double nonconformity(double point, double actual) {
  if (!std::isfinite(point) || !std::isfinite(actual)) {
    throw DataError("nonconformity: non-finite input");
  }
  return std::abs(point - actual);
}

ScoreWindow::ScoreWindow(int capacity, int hour) : capacity_(capacity), hour_(hour) {
  if (capacity < 1) throw ConfigError("score window capacity must be >= 1");
}

void ScoreWindow::roll(double score) {
  if (!(score >= 0.0) || !std::isfinite(score)) {
    throw DataError("score window: scores must be finite and non-negative");
  }
  scores_.push_back(score);
  while (scores_.size() > static_cast<std::size_t>(capacity_)) scores_.pop_front();
}

namespace {

double order_statistic(const std::deque<double>& scores, long rank) {
  std::vector<double> sorted(scores.begin(), scores.end());
  const long n = static_cast<long>(sorted.size());
  rank = std::clamp(rank, 1L, n);
  std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

double ScoreWindow::quantile(double alpha) const {
  if (scores_.empty()) throw DataError("conformal quantile of an empty score window");
  const double n1 = static_cast<double>(scores_.size() + 1);
  return order_statistic(scores_, static_cast<long>(std::ceil(alpha * n1)));
}

double ScoreWindow::quantile_percent(int percent) const {
  if (scores_.empty()) throw DataError("conformal quantile of an empty score window");
  const long n1 = static_cast<long>(scores_.size()) + 1;
  const long num = static_cast<long>(percent) * n1;
  const long rank = num > 0 ? (num + 99) / 100 : 0;
  return order_statistic(scores_, rank);
}

Eigen::Matrix<double, 1, kPercentiles> conformal_quantiles(double point, const ScoreWindow& window) {
  if (window.empty()) throw DataError("conformal quantiles need a non-empty score window");
  std::vector<double> sorted(window.scores().begin(), window.scores().end());
  std::sort(sorted.begin(), sorted.end());
  const long n = static_cast<long>(sorted.size());
  auto q_percent = [&](int percent) {
    const long num = static_cast<long>(percent) * (n + 1);
    const long rank = std::clamp(num > 0 ? (num + 99) / 100 : 0L, 1L, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
  };
  Eigen::Matrix<double, 1, kPercentiles> row;
  for (int q = 1; q <= kPercentiles; ++q) {
    row(q - 1) = q < 50 ? point - q_percent(100 - 2 * q) : point + q_percent(2 * q - 100);
  }
  return row;
}

}  // namespace probcast::conformal
