#include "probcast/metrics.hpp"

#include "probcast/csv.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace probcast::metrics {
namespace {

void require_same_shape(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(what) + ": forecast and actual cells are misaligned");
  }
  if (a.size() == 0) throw DataError(std::string(what) + ": no cells");
}

void require_monotone(const dist::QuantileForecast& qf) {
  if (!qf.monotone()) {
    throw DataError("quantiles for " + qf.day.to_string() + " are not monotone in the percentile");
  }
}

}  // namespace

std::vector<int> level_grid() {
  std::vector<int> out;
  for (int l = 2; l <= 98; l += 2) out.push_back(l);
  return out;
}

PointErrors mae_rmse(const Eigen::Ref<const Matrix>& pred, const Eigen::Ref<const Matrix>& actual) {
  require_same_shape(pred, actual, "mae_rmse");
  const Matrix e = pred - actual;
  const auto n = static_cast<double>(e.size());
  return {e.cwiseAbs().sum() / n, std::sqrt(e.squaredNorm() / n)};
}

IntervalSet intervals(std::span<const dist::QuantileForecast> forecasts, int level) {
  if (level < 2 || level > 98 || level % 2 != 0) {
    throw ConfigError("interval level must be an even percentage in [2, 98]");
  }
  const int lo = (100 - level) / 2, hi = (100 + level) / 2;
  IntervalSet set;
  set.level = level;
  const auto n = static_cast<Eigen::Index>(forecasts.size());
  set.lower.resize(n, kHours);
  set.upper.resize(n, kHours);
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto& qf = forecasts[static_cast<std::size_t>(d)];
    set.lower.row(d) = qf.values.col(lo - 1).transpose();
    set.upper.row(d) = qf.values.col(hi - 1).transpose();
  }
  return set;
}

double picp(const IntervalSet& set, const Eigen::Ref<const Matrix>& actual) {
  require_same_shape(set.lower, actual, "picp");
  const auto inside = ((actual.array() >= set.lower.array()) &&
                       (actual.array() <= set.upper.array())).count();
  return 100.0 * static_cast<double>(inside) / static_cast<double>(actual.size());
}

double mpiw(const IntervalSet& set) {
  if (set.lower.size() == 0) throw DataError("mpiw: no cells");
  return (set.upper - set.lower).mean();
}

double maace(const std::map<int, double>& picp_by_level) {
  double s = 0.0;
  const auto grid = level_grid();
  for (int l : grid) {
    const auto it = picp_by_level.find(l);
    if (it == picp_by_level.end()) {
      throw DataError("maace: missing PICP for level " + std::to_string(l));
    }
    s += std::abs(it->second - l);
  }
  return s / static_cast<double>(grid.size());
}

double pinball(double value, double y, double tau) {
  return y < value ? (1.0 - tau) * (value - y) : tau * (y - value);
}

double crps_cell(const Eigen::Ref<const Eigen::RowVectorXd>& quantiles, double y) {
  double s = 0.0;
  for (int q = 1; q <= kPercentiles; ++q) s += pinball(quantiles(q - 1), y, q / 100.0);
  return s / kPercentiles;
}

double crps_day(const dist::QuantileForecast& qf, const Eigen::Ref<const Vector>& actual) {
  require_monotone(qf);
  if (actual.size() != kHours) throw DataError("crps: a day needs 24 actual prices");
  double s = 0.0;
  for (int h = 0; h < kHours; ++h) s += crps_cell(qf.values.row(h), actual(h));
  return s / kHours;
}

Vector daily_crps(std::span<const dist::QuantileForecast> forecasts,
                  const Eigen::Ref<const Matrix>& actual) {
  if (actual.rows() != static_cast<Eigen::Index>(forecasts.size()) || actual.cols() != kHours) {
    throw DataError("crps: forecast and actual days are misaligned");
  }
  Vector out(actual.rows());
  for (Eigen::Index d = 0; d < actual.rows(); ++d) {
    out(d) = crps_day(forecasts[static_cast<std::size_t>(d)], actual.row(d).transpose());
  }
  return out;
}

double crps(std::span<const dist::QuantileForecast> forecasts,
            const Eigen::Ref<const Matrix>& actual) {
  const Vector daily = daily_crps(forecasts, actual);
  if (daily.size() == 0) throw DataError("crps: no days");
  return daily.mean();
}

MetricsReport evaluate(std::span<const dist::QuantileForecast> forecasts,
                       const Eigen::Ref<const Matrix>& point,
                       const Eigen::Ref<const Matrix>& actual) {
  MetricsReport r;
  Matrix median;
  if (point.size() == 0) {
    median.resize(static_cast<Eigen::Index>(forecasts.size()), kHours);
    for (std::size_t d = 0; d < forecasts.size(); ++d) {
      median.row(static_cast<Eigen::Index>(d)) = forecasts[d].values.col(49).transpose();
    }
  } else {
    median = point;
  }
  const PointErrors pe = mae_rmse(median, actual);
  r.mae = pe.mae;
  r.rmse = pe.rmse;
  r.crps = crps(forecasts, actual);
  for (int level : level_grid()) {
    const IntervalSet set = intervals(forecasts, level);
    r.picp[level] = picp(set, actual);
    r.mpiw[level] = mpiw(set);
  }
  r.maace = maace(r.picp);
  return r;
}

DmResult dm_test(const Eigen::Ref<const Vector>& loss_a, const Eigen::Ref<const Vector>& loss_b) {
  if (loss_a.size() != loss_b.size()) throw DataError("dm_test: loss series differ in length");
  const Eigen::Index t = loss_a.size();
  if (t < 2) throw DataError("dm_test: need at least two periods");
  const Vector d = loss_a - loss_b;
  DmResult r;
  r.mean_difference = d.mean();
  int lag = static_cast<int>(std::floor(std::cbrt(static_cast<double>(t))));
  while (static_cast<long>(lag + 1) * (lag + 1) * (lag + 1) <= t) ++lag;
  while (lag > 0 && static_cast<long>(lag) * lag * lag > t) --lag;
  r.lag = lag;

  const Vector c = d.array() - r.mean_difference;
  const auto n = static_cast<double>(t);
  double var = c.squaredNorm() / n;
  for (int k = 1; k <= lag && k < t; ++k) {
    const double gamma = c.tail(t - k).dot(c.head(t - k)) / n;
    var += 2.0 * (1.0 - k / (lag + 1.0)) * gamma;
  }
  var /= n;
  if (!(var > 0.0)) {
    if (r.mean_difference == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.degenerate = true;
      r.statistic = std::copysign(std::numeric_limits<double>::infinity(), r.mean_difference);
      r.p_value = 0.0;
    }
    return r;
  }
  r.statistic = r.mean_difference / std::sqrt(var);
  r.p_value = std::erfc(std::abs(r.statistic) / std::sqrt(2.0));
  return r;
}

DmMatrix dm_matrix(const std::vector<std::string>& names, const std::vector<Vector>& losses) {
  if (names.size() != losses.size()) throw DataError("dm_matrix: names and losses differ in count");
  const auto k = static_cast<Eigen::Index>(names.size());
  DmMatrix m{names, Matrix::Zero(k, k), Matrix::Ones(k, k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const DmResult r = dm_test(losses[static_cast<std::size_t>(i)], losses[static_cast<std::size_t>(j)]);
      m.statistic(i, j) = r.statistic;
      m.statistic(j, i) = -r.statistic;
      m.p_value(i, j) = m.p_value(j, i) = r.p_value;
    }
  }
  return m;
}

void write_dm_matrix(const DmMatrix& m, bool p_values, std::ostream& out) {
  const Matrix& v = p_values ? m.p_value : m.statistic;
  out << "model";
  for (const auto& n : m.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) {
      out << ',' << csv::format_number(v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

}  // namespace probcast::metrics
