#include "probcast/data.hpp"
#include "probcast/synthetic.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::data;

namespace {

std::string series_csv(Date first, int days, DstRule rule = DstRule::kNone) {
  std::ostringstream out;
  out << "timestamp,price,load_forecast,renewable_forecast\n";
  for (int d = 0; d < days; ++d) {
    const Date day = first + d;
    for (int h = 0; h < kHours; ++h) {
      if (is_spring_forward_day(day, rule) && h == kDstTransitionHour) continue;
      out << format_timestamp({day, h}) << ',' << 10 * d + h << ',' << 1000 + h << ',' << 200 + d
          << '\n';
    }
  }
  return out.str();
}

MarketSeries read(const std::string& text, DstRule rule = DstRule::kNone) {
  std::istringstream in(text);
  CsvSchema schema;
  schema.dst_rule = rule;
  return ingest_csv(in, schema);
}

}  // namespace

TEST(Ingest, FourValidRows) {
  const auto s = read(
      "timestamp,price,load_forecast,renewable_forecast\n"
      "2023-01-02T00:00,10,1,2\n2023-01-02T01:00,11,1,2\n"
      "2023-01-02T02:00,-5.5,1,2\n2023-01-02T03:00,12,1,2\n");
  ASSERT_EQ(s.records.size(), 4u);
  EXPECT_DOUBLE_EQ(s.records[2].price, -5.5);
  EXPECT_TRUE(s.gaps.empty());
}

TEST(Ingest, BlankCellBecomesGap) {
  const auto s = read(
      "timestamp,price,load_forecast,renewable_forecast\n"
      "2023-01-02T00:00,10,1,2\n2023-01-02T01:00,,1,2\n");
  ASSERT_EQ(s.gaps.size(), 1u);
  EXPECT_EQ(s.gaps[0].column, "price");
  EXPECT_EQ(s.gaps[0].timestamp.hour, 1);
  EXPECT_FALSE(s.records[1].complete());
}

TEST(Ingest, DuplicateAndBackwardsTimestampsAreErrors) {
  const std::string head = "timestamp,price,load_forecast,renewable_forecast\n";
  try {
    read(head + "2023-01-02T05:00,1,1,1\n2023-01-02T05:00,2,1,1\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate timestamp"), std::string::npos);
  }
  EXPECT_THROW(read(head + "2023-01-02T05:00,1,1,1\n2023-01-02T04:00,2,1,1\n"), DataError);
  EXPECT_THROW(read("when,price\n2023-01-02T05:00,1\n"), DataError);
}

TEST(Ingest, MissingFile) {
  EXPECT_THROW(ingest_csv("/nonexistent/prices.csv"), DataError);
}

TEST(NormalizeClock, SpringGapAndFallDuplicateAreAveraged) {
  const std::string head = "timestamp,price,load_forecast,renewable_forecast\n";
  std::string text = head;
  // 2023-03-26 spring forward, 2023-10-29 fall back in Berlin.
  for (int h = 0; h < kHours; ++h) {
    if (h == 2) continue;
    const double p = h == 1 ? 40 : h == 3 ? 60 : 1;
    text += format_timestamp({Date::from_ymd(2023, 3, 26), h}) + "," + std::to_string(p) + ",1,1\n";
  }
  for (int h = 0; h < kHours; ++h) {
    const auto ts = format_timestamp({Date::from_ymd(2023, 10, 29), h});
    if (h == 2) text += ts + ",30,1,1\n" + ts + ",50,1,1\n";
    else text += ts + ",1,1,1\n";
  }
  const auto raw = read(text, DstRule::kEuropeBerlin);
  const auto norm = normalize_clock(raw);
  const auto days = daily_profiles(norm);
  ASSERT_EQ(norm.records.size(), days.size() * kHours);
  EXPECT_DOUBLE_EQ(days.at(Date::from_ymd(2023, 3, 26)).price[2], 50.0);
  EXPECT_DOUBLE_EQ(days.at(Date::from_ymd(2023, 10, 29)).price[2], 40.0);
}

TEST(NormalizeClock, NoTransitionIsIdentity) {
  const auto raw = read(series_csv(Date::from_ymd(2023, 1, 2), 3));
  const auto norm = normalize_clock(raw);
  ASSERT_EQ(norm.records.size(), raw.records.size());
  for (std::size_t i = 0; i < raw.records.size(); ++i) {
    EXPECT_EQ(norm.records[i].timestamp, raw.records[i].timestamp);
    EXPECT_EQ(norm.records[i].price, raw.records[i].price);
  }
}

TEST(NormalizeClock, TwoDuplicatesOnFallDayIsError) {
  std::string text = "timestamp,price,load_forecast,renewable_forecast\n";
  for (int h = 0; h < kHours; ++h) {
    const auto ts = format_timestamp({Date::from_ymd(2023, 10, 29), h});
    text += ts + ",1,1,1\n";
    if (h == 2) text += ts + ",1,1,1\n" + ts + ",1,1,1\n";
  }
  const auto raw = read(text, DstRule::kEuropeBerlin);
  EXPECT_THROW(normalize_clock(raw), DataError);
}

TEST(Features, TenDaysGiveThreeRows) {
  const Date first = Date::from_ymd(2023, 1, 2);  // Monday
  const auto ds = build_features(normalize_clock(read(series_csv(first, 10))));
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.rows[0].date, first + 7);
  for (const auto& r : ds.rows) EXPECT_EQ(r.features.size(), kNumFeatures);
  // Lags: d-1, d-2, d-3, d-7 at hour 5; day index 7 has price 10 * d + h.
  const auto& r = ds.rows[0];
  EXPECT_DOUBLE_EQ(r.features(0 * kHours + 5), 65.0);
  EXPECT_DOUBLE_EQ(r.features(1 * kHours + 5), 55.0);
  EXPECT_DOUBLE_EQ(r.features(2 * kHours + 5), 45.0);
  EXPECT_DOUBLE_EQ(r.features(3 * kHours + 5), 5.0);
  EXPECT_DOUBLE_EQ(r.features(kLoadOffset + 5), 1005.0);
  EXPECT_DOUBLE_EQ(r.features(kRenewableOffset + 5), 207.0);
  EXPECT_DOUBLE_EQ(r.targets(5), 75.0);
  // first + 7 is a Monday.
  Vector dummies = r.features.tail(kWeekdays);
  Vector monday = Vector::Zero(kWeekdays);
  monday(0) = 1.0;
  EXPECT_EQ(dummies, monday);
}

TEST(Features, GapInLagDayDropsRow) {
  std::string text = series_csv(Date::from_ymd(2023, 1, 2), 12);
  // Blank day 2 hour 4. Among emitted rows only day 9 lags onto it (d-7).
  const std::string needle = "2023-01-04T04:00,24,";
  text.replace(text.find(needle), needle.size(), "2023-01-04T04:00,,");
  const auto ds = build_features(normalize_clock(read(text)));
  std::vector<Date> dates;
  for (const auto& r : ds.rows) dates.push_back(r.date);
  EXPECT_EQ(dates, (std::vector<Date>{Date::from_ymd(2023, 1, 9), Date::from_ymd(2023, 1, 10),
                                      Date::from_ymd(2023, 1, 12),
                                      Date::from_ymd(2023, 1, 13)}));
}

TEST(Features, TooShortSeries) {
  EXPECT_THROW(build_features(normalize_clock(read(series_csv(Date::from_ymd(2023, 1, 2), 5)))),
               DataError);
}

TEST(Splits, AssignsAndRejectsOverlap) {
  const Date first = Date::from_ymd(2023, 1, 2);
  const auto ds = build_features(normalize_clock(read(series_csv(first, 20))));
  SplitBoundaries b{{first + 7, first + 12}, {first + 13, first + 15}, {first + 16, first + 19}};
  const auto s = split_by_dates(ds, b);
  EXPECT_EQ(s.indices(Split::kTrain).size(), 6u);
  EXPECT_EQ(s.indices(Split::kValidation).size(), 3u);
  EXPECT_EQ(s.indices(Split::kTest).size(), 4u);
  b.validation.first = first + 12;
  EXPECT_THROW(split_by_dates(ds, b), ConfigError);
}

TEST(Standardizer, TwoPointPopulationStatistics) {
  FeatureDataset ds;
  for (int i = 0; i < 2; ++i) {
    DailyRow r{Date::from_ymd(2023, 1, 2) + i, Vector::Constant(kNumFeatures, 0.0), Vector::Constant(kHours, 5.0 * i)};
    for (int j = 0; j < kNumFeatures; ++j) r.features(j) = 1.0 + 2.0 * i + j;
    ds.rows.push_back(r);
    ds.split.push_back(Split::kTrain);
  }
  const auto s = fit_standardizer(ds);
  EXPECT_DOUBLE_EQ(s.feature_mean(0), 2.0);
  EXPECT_DOUBLE_EQ(s.feature_std(0), 1.0);
  EXPECT_DOUBLE_EQ(s.target_std(3), 2.5);

  ds.rows[1].features(17) = ds.rows[0].features(17);
  try {
    fit_standardizer(ds);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("column 17"), std::string::npos);
  }
}

TEST(Standardizer, RoundTripAndTrainingOnly) {
  auto spec = synthetic::SyntheticSpec{};
  spec.days = 120;
  const auto ds0 = build_features(normalize_clock(synthetic::make_synthetic(spec, 3)));
  const Date a = ds0.rows.front().date;
  const auto ds = split_by_dates(ds0, {{a, a + 59}, {a + 60, a + 89}, {a + 90, a + 112}});
  const auto s = fit_standardizer(ds, true);
  // Statistics come from training rows only.
  const auto train = ds.indices(Split::kTrain);
  EXPECT_NEAR(s.target_mean(7), ds.target_matrix(train).col(7).mean(), 1e-9);
  // Dummies untouched.
  EXPECT_EQ(s.feature_mean.tail(kWeekdays), Vector::Zero(kWeekdays));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    Vector x(kNumFeatures);
    for (auto& v : x) v = 50.0 * n01(rng);
    const Vector back = s.inverse_features(s.transform_features(x));
    EXPECT_LT(((back - x).array().abs() / x.array().abs().max(1.0)).maxCoeff(), 1e-10);
  }
  const auto z = s.transform(ds);
  EXPECT_NEAR(z.target_matrix(train).col(0).mean(), 0.0, 1e-9);
}

TEST(DatasetCsv, RoundTrip) {
  const auto ds = build_features(normalize_clock(read(series_csv(Date::from_ymd(2023, 1, 2), 12))));
  std::stringstream ss;
  write_dataset_csv(ds, ss);
  const auto back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.rows[2].features, ds.rows[2].features);
  EXPECT_EQ(back.rows[4].targets, ds.rows[4].targets);
}

TEST(Synthetic, DstArtifactsSurviveIngestAndNormalize) {
  synthetic::SyntheticSpec spec;
  spec.start = Date::from_ymd(2022, 3, 20);
  spec.days = 230;
  const auto series = synthetic::make_synthetic(spec, 5);
  std::stringstream ss;
  write_series_csv(series, ss);
  const auto raw = ingest_csv(ss);
  const auto norm = normalize_clock(raw);
  EXPECT_EQ(norm.records.size(), static_cast<std::size_t>(spec.days) * kHours);
  EXPECT_EQ(raw.records.size(), norm.records.size());  // one hour lost in spring, one gained in fall
  const auto days = daily_profiles(norm);
  for (const auto& [d, p] : days) {
    for (int h = 0; h < kHours; ++h) ASSERT_TRUE(std::isfinite(p.price[h])) << d.to_string();
  }
}
