#include "probcast/data.hpp"

#include "probcast/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace probcast::data {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_or_nan(double a, double b) {
  return (std::isfinite(a) && std::isfinite(b)) ? 0.5 * (a + b) : kNaN;
}

HourlyRecord average(const HourlyRecord& a, const HourlyRecord& b, LocalHour t) {
  return {t, mean_or_nan(a.price, b.price), mean_or_nan(a.load_forecast, b.load_forecast),
          mean_or_nan(a.renewable_forecast, b.renewable_forecast)};
}

std::string column_name(const char* prefix, int i, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i);
  return buf;
}

}  // namespace

bool HourlyRecord::complete() const {
  return std::isfinite(price) && std::isfinite(load_forecast) &&
         std::isfinite(renewable_forecast);
}

MarketSeries ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path + "'");
  return ingest_csv(in, schema, path);
}

MarketSeries ingest_csv(std::istream& in, const CsvSchema& schema,
                        const std::string& source_name) {
  const csv::Table table = csv::Table::read(in, source_name);
  const std::size_t c_time = table.require(schema.timestamp);
  const std::array<std::pair<std::size_t, const std::string*>, 3> value_columns = {{
      {table.require(schema.price), &schema.price},
      {table.require(schema.load_forecast), &schema.load_forecast},
      {table.require(schema.renewable_forecast), &schema.renewable_forecast},
  }};

  MarketSeries series;
  series.dst_rule = schema.dst_rule;
  series.records.reserve(table.rows().size());
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& row = table.rows()[r];
    const std::string where = source_name + ":" + std::to_string(table.line_of(r));
    HourlyRecord rec;
    try {
      rec.timestamp = parse_timestamp(row[c_time]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    double* targets[3] = {&rec.price, &rec.load_forecast, &rec.renewable_forecast};
    for (int k = 0; k < 3; ++k) {
      const auto value = csv::parse_number(row[value_columns[k].first]);
      *targets[k] = value.value_or(kNaN);
      if (!value) series.gaps.push_back({rec.timestamp, *value_columns[k].second});
    }
    if (!series.records.empty()) {
      const LocalHour& prev = series.records.back().timestamp;
      if (rec.timestamp < prev) {
        throw DataError(where + ": non-monotone timestamp " + format_timestamp(rec.timestamp));
      }
      if (rec.timestamp == prev &&
          !(is_fall_back_day(rec.timestamp.date, schema.dst_rule) &&
            rec.timestamp.hour == kDstTransitionHour)) {
        throw DataError(where + ": duplicate timestamp " + format_timestamp(rec.timestamp));
      }
    }
    series.records.push_back(rec);
  }
  return series;
}

void write_series_csv(const MarketSeries& series, std::ostream& out) {
  out << "timestamp,price,load_forecast,renewable_forecast\n";
  for (const auto& r : series.records) {
    auto cell = [](double v) { return std::isfinite(v) ? csv::format_number(v) : std::string(); };
    out << format_timestamp(r.timestamp) << ',' << cell(r.price) << ','
        << cell(r.load_forecast) << ',' << cell(r.renewable_forecast) << '\n';
  }
}

MarketSeries normalize_clock(const MarketSeries& series) {
  MarketSeries out;
  out.dst_rule = series.dst_rule;
  out.gaps = series.gaps;
  if (series.records.empty()) return out;

  const Date first = series.records.front().timestamp.date;
  const Date last = series.records.back().timestamp.date;
  out.records.reserve(static_cast<std::size_t>((last - first + 1) * kHours));

  std::size_t i = 0;
  const auto& recs = series.records;
  for (Date d = first; d <= last; d = d + 1) {
    std::array<std::vector<const HourlyRecord*>, kHours> by_hour;
    for (; i < recs.size() && recs[i].timestamp.date == d; ++i) {
      by_hour[recs[i].timestamp.hour].push_back(&recs[i]);
    }
    const bool spring = is_spring_forward_day(d, series.dst_rule);
    const bool fall = is_fall_back_day(d, series.dst_rule);
    int duplicates = 0;
    for (int h = 0; h < kHours; ++h) {
      if (by_hour[h].size() > 1) duplicates += static_cast<int>(by_hour[h].size()) - 1;
    }
    if (duplicates > 0 && !fall) {
      throw DataError("duplicate timestamp on " + d.to_string());
    }
    if (duplicates > 1) {
      throw DataError("more than one duplicate hour on fall-back day " + d.to_string());
    }

    for (int h = 0; h < kHours; ++h) {
      const LocalHour t{d, h};
      const auto& slot = by_hour[h];
      if (slot.size() == 1) {
        out.records.push_back(*slot[0]);
      } else if (slot.size() == 2) {
        if (h != kDstTransitionHour) {
          throw DataError("duplicate hour outside the DST transition on " + d.to_string());
        }
        out.records.push_back(average(*slot[0], *slot[1], t));
      } else if (spring && h == kDstTransitionHour && by_hour[h - 1].size() == 1 &&
                 by_hour[h + 1].size() == 1) {
        out.records.push_back(average(*by_hour[h - 1][0], *by_hour[h + 1][0], t));
      } else {
        out.records.push_back({t, kNaN, kNaN, kNaN});
        out.gaps.push_back({t, "*"});
      }
    }
  }
  return out;
}

std::map<Date, DailyProfile> daily_profiles(const MarketSeries& normalized) {
  std::map<Date, DailyProfile> days;
  for (const auto& r : normalized.records) {
    auto& p = days[r.timestamp.date];
    p.price[r.timestamp.hour] = r.price;
    p.load[r.timestamp.hour] = r.load_forecast;
    p.renewable[r.timestamp.hour] = r.renewable_forecast;
  }
  return days;
}

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
    default: return "unassigned";
  }
}

std::vector<std::size_t> FeatureDataset::indices(Split s) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (split[i] == s) idx.push_back(i);
  }
  return idx;
}

std::ptrdiff_t FeatureDataset::find(Date d) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), d,
                             [](const DailyRow& r, Date v) { return r.date < v; });
  if (it == rows.end() || it->date != d) return -1;
  return it - rows.begin();
}

Matrix FeatureDataset::feature_matrix(std::span<const std::size_t> idx) const {
  Matrix x(static_cast<Eigen::Index>(idx.size()), kNumFeatures);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = rows[idx[i]].features.transpose();
  }
  return x;
}

Matrix FeatureDataset::target_matrix(std::span<const std::size_t> idx) const {
  Matrix y(static_cast<Eigen::Index>(idx.size()), kHours);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    y.row(static_cast<Eigen::Index>(i)) = rows[idx[i]].targets.transpose();
  }
  return y;
}

FeatureDataset build_features(const MarketSeries& normalized) {
  const auto days = daily_profiles(normalized);
  if (days.size() < 8) {
    throw DataError("series covers " + std::to_string(days.size()) +
                    " days; at least 8 are needed for the d-7 lag");
  }
  static constexpr int kLagDays[kPriceLags] = {1, 2, 3, 7};

  FeatureDataset ds;
  for (const auto& [date, profile] : days) {
    const DailyProfile* lagged[kPriceLags];
    bool ok = true;
    for (int k = 0; k < kPriceLags && ok; ++k) {
      auto it = days.find(date - kLagDays[k]);
      ok = it != days.end();
      if (ok) lagged[k] = &it->second;
    }
    if (!ok) continue;

    DailyRow row{date, Vector::Zero(kNumFeatures), Vector::Zero(kHours)};
    for (int k = 0; k < kPriceLags; ++k) {
      for (int h = 0; h < kHours; ++h) row.features(k * kHours + h) = lagged[k]->price[h];
    }
    for (int h = 0; h < kHours; ++h) {
      row.features(kLoadOffset + h) = profile.load[h];
      row.features(kRenewableOffset + h) = profile.renewable[h];
      row.targets(h) = profile.price[h];
    }
    row.features(kWeekdayOffset + date.weekday()) = 1.0;
    if (!row.features.allFinite() || !row.targets.allFinite()) continue;
    ds.rows.push_back(std::move(row));
  }
  ds.split.assign(ds.rows.size(), Split::kUnassigned);
  return ds;
}

FeatureDataset split_by_dates(const FeatureDataset& dataset, const SplitBoundaries& b) {
  for (const DateRange* r : {&b.train, &b.validation, &b.test}) {
    if (r->last < r->first) {
      throw ConfigError("split range " + r->first.to_string() + ".." + r->last.to_string() +
                        " is reversed");
    }
  }
  if (!(b.train.last < b.validation.first) || !(b.validation.last < b.test.first)) {
    throw ConfigError("split ranges overlap or are out of order (train < validation < test)");
  }
  FeatureDataset out;
  for (const auto& row : dataset.rows) {
    Split s = Split::kUnassigned;
    if (b.train.contains(row.date)) s = Split::kTrain;
    else if (b.validation.contains(row.date)) s = Split::kValidation;
    else if (b.test.contains(row.date)) s = Split::kTest;
    if (s == Split::kUnassigned) continue;
    out.rows.push_back(row);
    out.split.push_back(s);
  }
  return out;
}

Standardizer fit_standardizer(const FeatureDataset& dataset, bool keep_dummies) {
  const auto train = dataset.indices(Split::kTrain);
  if (train.empty()) throw DataError("cannot fit standardizer: training split is empty");
  const Matrix x = dataset.feature_matrix(train);
  const Matrix y = dataset.target_matrix(train);

  auto column_stats = [](const Matrix& m, Vector& mean, Vector& sd, int index_base,
                         bool skip_dummies) {
    mean = m.colwise().mean().transpose();
    sd = ((m.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (skip_dummies && j >= kWeekdayOffset) {
        mean(j) = 0.0;
        sd(j) = 1.0;
        continue;
      }
      const double scale = std::max(1.0, std::abs(mean(j)));
      if (!(sd(j) > 1e-12 * scale)) {
        throw DataError("zero-variance column " + std::to_string(index_base + j) +
                        " in training split");
      }
    }
  };
  Standardizer s;
  column_stats(x, s.feature_mean, s.feature_std, 0, keep_dummies);
  column_stats(y, s.target_mean, s.target_std, kNumFeatures, false);
  return s;
}

Vector Standardizer::transform_features(const Vector& x) const {
  return ((x - feature_mean).array() / feature_std.array()).matrix();
}
Vector Standardizer::inverse_features(const Vector& z) const {
  return (z.array() * feature_std.array()).matrix() + feature_mean;
}
Vector Standardizer::transform_targets(const Vector& y) const {
  return ((y - target_mean).array() / target_std.array()).matrix();
}
Vector Standardizer::inverse_targets(const Vector& z) const {
  return (z.array() * target_std.array()).matrix() + target_mean;
}

FeatureDataset Standardizer::transform(const FeatureDataset& dataset) const {
  FeatureDataset out = dataset;
  for (auto& row : out.rows) {
    row.features = transform_features(row.features);
    row.targets = transform_targets(row.targets);
  }
  return out;
}

void write_dataset_csv(const FeatureDataset& dataset, std::ostream& out) {
  out << "date";
  for (int j = 0; j < kNumFeatures; ++j) out << ',' << column_name("f", j, 3);
  for (int h = 0; h < kHours; ++h) out << ',' << column_name("t", h, 2);
  out << '\n';
  for (const auto& row : dataset.rows) {
    out << row.date.to_string();
    for (int j = 0; j < kNumFeatures; ++j) out << ',' << csv::format_number(row.features(j));
    for (int h = 0; h < kHours; ++h) out << ',' << csv::format_number(row.targets(h));
    out << '\n';
  }
}

FeatureDataset read_dataset_csv(std::istream& in, const std::string& source_name) {
  const csv::Table table = csv::Table::read(in, source_name);
  if (table.header().size() != 1 + kNumFeatures + kHours || table.header()[0] != "date") {
    throw DataError(source_name + ": not a feature dataset (expected date, f000..f150, t00..t23)");
  }
  FeatureDataset ds;
  for (std::size_t r = 0; r < table.rows().size(); ++r) {
    const auto& cells = table.rows()[r];
    const std::string where = source_name + ":" + std::to_string(table.line_of(r));
    DailyRow row{Date::parse(cells[0]), Vector(kNumFeatures), Vector(kHours)};
    for (int j = 0; j < kNumFeatures; ++j) row.features(j) = csv::require_number(cells[1 + j], where);
    for (int h = 0; h < kHours; ++h) {
      row.targets(h) = csv::require_number(cells[1 + kNumFeatures + h], where);
    }
    if (!ds.rows.empty() && !(ds.rows.back().date < row.date)) {
      throw DataError(where + ": dates must be strictly increasing");
    }
    ds.rows.push_back(std::move(row));
  }
  ds.split.assign(ds.rows.size(), Split::kUnassigned);
  return ds;
}

}  // namespace probcast::data
