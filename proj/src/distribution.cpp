#include "probcast/distribution.hpp"

#include "probcast/csv.hpp"
#include "probcast/normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace probcast::dist {

bool QuantileForecast::monotone() const {
  for (Eigen::Index h = 0; h < values.rows(); ++h) {
    for (Eigen::Index q = 1; q < values.cols(); ++q) {
      if (values(h, q) < values(h, q - 1)) return false;
    }
  }
  return true;
}

void QuantileForecast::sort_hours() {
  for (Eigen::Index h = 0; h < values.rows(); ++h) {
    auto row = values.row(h);
    std::sort(row.begin(), row.end());
  }
}

Eigen::Matrix<double, 1, kPercentiles> gaussian_quantile_row(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean)) {
    throw NumericalError("gaussian quantiles need finite mean and variance > 0");
  }
  const double sd = std::sqrt(variance);
  Eigen::Matrix<double, 1, kPercentiles> row;
  for (int q = 1; q <= kPercentiles; ++q) {
    row(q - 1) = mean + sd * normal_quantile(q / 100.0);
  }
  return row;
}

void MixtureDistribution::validate() const {
  if (weights.size() == 0 || means.size() != weights.size() || stddevs.size() != weights.size()) {
    throw DataError("mixture: component arrays empty or of unequal length");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-12) {
    throw DataError("mixture: weights must be non-negative and sum to one");
  }
  if (!(stddevs.array() > 0.0).all() || !means.allFinite() || !stddevs.allFinite()) {
    throw DataError("mixture: standard deviations must be positive and finite");
  }
}

MixtureDistribution MixtureDistribution::equal_weights(const Vector& means, const Vector& stddevs) {
  const auto n = means.size();
  return {Vector::Constant(n, 1.0 / static_cast<double>(n)), means, stddevs};
}

MixtureDistribution MixtureDistribution::single(double mean, double stddev) {
  return {Vector::Ones(1), Vector::Constant(1, mean), Vector::Constant(1, stddev)};
}

double mixture_cdf(const MixtureDistribution& mix, double x) {
  double p = 0.0;
  for (Eigen::Index i = 0; i < mix.size(); ++i) {
    p += mix.weights(i) * normal_cdf((x - mix.means(i)) / mix.stddevs(i));
  }
  return std::clamp(p, 0.0, 1.0);
}

double mixture_pdf(const MixtureDistribution& mix, double x) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < mix.size(); ++i) {
    d += mix.weights(i) * normal_pdf((x - mix.means(i)) / mix.stddevs(i)) / mix.stddevs(i);
  }
  return d;
}

double mixture_quantile_initial_guess(const MixtureDistribution& mix, double p) {
  const double z = normal_quantile(p);
  return mix.weights.dot(mix.means + z * mix.stddevs);
}

double mixture_quantile(const MixtureDistribution& mix, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("mixture quantile: p must lie in (0, 1)");
  if (mix.size() == 1) return mix.means(0) + mix.stddevs(0) * normal_quantile(p);

  auto f = [&](double x) { return mixture_cdf(mix, x) - p; };

  double lo = (mix.means - 10.0 * mix.stddevs).minCoeff();
  double hi = (mix.means + 10.0 * mix.stddevs).maxCoeff();
  double width = hi - lo;
  double f_lo = f(lo), f_hi = f(hi);
  while (f_lo > 0.0) {
    width *= 2.0;
    lo -= width;
    f_lo = f(lo);
  }
  while (f_hi < 0.0) {
    width *= 2.0;
    hi += width;
    f_hi = f(hi);
  }
  const double x0 = mixture_quantile_initial_guess(mix, p);
  if (x0 > lo && x0 < hi) {
    const double f0 = f(x0);
    if (f0 == 0.0) return x0;
    if (f0 < 0.0) {
      lo = x0;
      f_lo = f0;
    } else {
      hi = x0;
      f_hi = f0;
    }
  }

  // Brent's method on [lo, hi] with f(lo) < 0 < f(hi).
  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 300; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * 1e-16 * std::abs(b) + 1e-300;
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= 1e-14 || std::abs(m) <= tol) break;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, pp, qq;
      if (a == c) {
        pp = 2.0 * m * s;
        qq = 1.0 - s;
      } else {
        const double q = fa / fc, r = fb / fc;
        pp = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        qq = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (pp > 0.0) qq = -qq;
      pp = std::abs(pp);
      if (2.0 * pp < std::min(3.0 * m * qq - std::abs(tol * qq), std::abs(e * qq))) {
        e = d;
        d = pp / qq;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  if (!(std::abs(fb) < 1e-8)) {
    throw NumericalError("mixture quantile: root finder did not reach |F(x) - p| < 1e-8");
  }
  return b;
}

QuantileForecast to_quantile_forecast(Date day, const ModelOutput& source) {
  QuantileForecast qf;
  qf.day = day;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianOutput>) {
          if (s.mean.size() != kHours || s.variance.size() != kHours) {
            throw DataError("gaussian output must have 24 means and variances");
          }
          for (int h = 0; h < kHours; ++h) {
            qf.values.row(h) = gaussian_quantile_row(s.mean(h), s.variance(h));
          }
        } else if constexpr (std::is_same_v<T, MixtureOutput>) {
          if (s.hours.size() != kHours) throw DataError("mixture output must have 24 hours");
          for (int h = 0; h < kHours; ++h) {
            s.hours[h].validate();
            for (int q = 1; q <= kPercentiles; ++q) {
              qf.values(h, q - 1) = mixture_quantile(s.hours[h], q / 100.0);
            }
          }
        } else {
          if (s.values.rows() != kHours || s.values.cols() != kPercentiles) {
            throw DataError("explicit quantiles must be 24 x 99");
          }
          if (!s.values.allFinite()) throw DataError("explicit quantiles must be finite");
          qf.values = s.values;
        }
      },
      source);
  if (!qf.monotone()) qf.sort_hours();
  return qf;
}

void write_quantile_csv(const std::vector<QuantileForecast>& forecasts, std::ostream& out) {
  out << "date,hour";
  for (int q = 1; q <= kPercentiles; ++q) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "q%02d", q);
    out << ',' << buf;
  }
  out << '\n';
  for (const auto& f : forecasts) {
    const std::string day = f.day.to_string();
    for (int h = 0; h < kHours; ++h) {
      out << day << ',' << h;
      for (int q = 0; q < kPercentiles; ++q) out << ',' << csv::format_number(f.values(h, q));
      out << '\n';
    }
  }
}

std::vector<QuantileForecast> read_quantile_csv(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::Table::read(in, source_name);
  if (t.header().size() != 2 + kPercentiles || t.header()[0] != "date" || t.header()[1] != "hour") {
    throw DataError(source_name + ": not a quantile forecast file (date, hour, q01..q99)");
  }
  std::map<Date, std::pair<QuantileForecast, int>> days;
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& c = t.rows()[r];
    const std::string where = source_name + ":" + std::to_string(t.line_of(r));
    const Date d = Date::parse(c[0]);
    const double hour = csv::require_number(c[1], where);
    if (hour < 0 || hour >= kHours || hour != std::floor(hour)) {
      throw DataError(where + ": hour out of range");
    }
    auto& [qf, count] = days[d];
    qf.day = d;
    for (int q = 0; q < kPercentiles; ++q) {
      qf.values(static_cast<int>(hour), q) = csv::require_number(c[2 + q], where);
    }
    ++count;
  }
  std::vector<QuantileForecast> out;
  for (auto& [d, entry] : days) {
    if (entry.second != kHours) {
      throw DataError(source_name + ": day " + d.to_string() + " does not have 24 hour rows");
    }
    out.push_back(std::move(entry.first));
  }
  return out;
}

}  // namespace probcast::dist
