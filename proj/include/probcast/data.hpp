#pragma once

#include "probcast/common.hpp"
#include "probcast/date.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace probcast::data {

/// One hourly observation in market local time. Missing values are NaN.
struct HourlyRecord {
  LocalHour timestamp;
  double price = 0.0;               // EUR/MWh, may be negative
  double load_forecast = 0.0;       // MW
  double renewable_forecast = 0.0;  // MW

  bool complete() const;
};

/// A field that could not be parsed during ingestion.
struct Gap {
  LocalHour timestamp;
  std::string column;
};

struct MarketSeries {
  std::vector<HourlyRecord> records;
  DstRule dst_rule = DstRule::kEuropeBerlin;
  std::vector<Gap> gaps;
};

/// Header-driven column mapping. Defaults match the CSVs written by `synth`.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string price = "price";
  std::string load_forecast = "load_forecast";
  std::string renewable_forecast = "renewable_forecast";
  DstRule dst_rule = DstRule::kEuropeBerlin;
};

MarketSeries ingest_csv(const std::string& path, const CsvSchema& schema = {});
MarketSeries ingest_csv(std::istream& in, const CsvSchema& schema = {},
                        const std::string& source_name = "<stream>");
void write_series_csv(const MarketSeries& series, std::ostream& out);

/// Repairs the two DST anomalies: the skipped spring hour is filled with the
/// mean of its neighbours; the doubled autumn hour collapses to the mean of
/// its two values. Hours absent for other reasons are inserted as NaN gaps,
/// so every retained calendar day carries exactly 24 records.
MarketSeries normalize_clock(const MarketSeries& series);

/// 24 values per calendar day, NaN where missing.
struct DailyProfile {
  std::array<double, kHours> price{};
  std::array<double, kHours> load{};
  std::array<double, kHours> renewable{};
};

/// Requires a normalized series (24 records per day).
std::map<Date, DailyProfile> daily_profiles(const MarketSeries& normalized);

enum class Split { kUnassigned, kTrain, kValidation, kTest };
std::string to_string(Split split);

struct DailyRow {
  Date date;
  Vector features;  // kNumFeatures
  Vector targets;   // kHours
};

struct FeatureDataset {
  std::vector<DailyRow> rows;
  std::vector<Split> split;  // parallel to rows

  std::size_t size() const { return rows.size(); }
  std::vector<std::size_t> indices(Split s) const;
  /// Row index of the given date, or -1.
  std::ptrdiff_t find(Date d) const;
  Matrix feature_matrix(std::span<const std::size_t> idx) const;
  Matrix target_matrix(std::span<const std::size_t> idx) const;
};

/// Daily design matrix: prices at d-1, d-2, d-3, d-7 (24 each), load and
/// renewable forecasts for d, Monday-first weekday dummies; targets are the
/// 24 prices of d. Days with any missing input or target are dropped.
FeatureDataset build_features(const MarketSeries& normalized);

struct SplitBoundaries {
  DateRange train;
  DateRange validation;
  DateRange test;
};

/// Labels rows by date range and drops rows outside all ranges.
FeatureDataset split_by_dates(const FeatureDataset& dataset, const SplitBoundaries& bounds);

/// Per-column affine standardization fitted on training rows only
/// (population standard deviation).
struct Standardizer {
  Vector feature_mean;
  Vector feature_std;
  Vector target_mean;
  Vector target_std;

  Vector transform_features(const Vector& x) const;
  Vector inverse_features(const Vector& z) const;
  Vector transform_targets(const Vector& y) const;
  Vector inverse_targets(const Vector& z) const;
  double inverse_target(double z, int hour) const {
    return z * target_std(hour) + target_mean(hour);
  }
  FeatureDataset transform(const FeatureDataset& dataset) const;
};

/// Weekday dummies are exempt from scaling when `keep_dummies` is set:
/// they keep mean 0 and std 1 so the transform is the identity on them.
Standardizer fit_standardizer(const FeatureDataset& dataset, bool keep_dummies = false);

void write_dataset_csv(const FeatureDataset& dataset, std::ostream& out);
FeatureDataset read_dataset_csv(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace probcast::data
