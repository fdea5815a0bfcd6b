#pragma once

#include "probcast/config.hpp"
#include "probcast/data.hpp"
#include "probcast/distribution.hpp"
#include "probcast/linear.hpp"
#include "probcast/metrics.hpp"
#include "probcast/neural.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probcast::pipeline {

struct PreparedData {
  data::MarketSeries normalized;
  data::FeatureDataset dataset;       // raw units, split-labelled
  data::FeatureDataset standardized;  // same rows, standardized with training statistics
  data::Standardizer standardizer;
  std::vector<Date> validation_days;
  std::vector<Date> test_days;
  Matrix validation_actual;  // days x 24, EUR/MWh
  Matrix test_actual;
};

PreparedData prepare_data(const data::MarketSeries& raw, const data::SplitBoundaries& splits);
/// Reads the configured CSV or generates the synthetic series.
data::MarketSeries load_series(const config::ExperimentConfig& cfg);

/// Forecasts of one model for the test days.
struct ModelForecast {
  std::string model;
  std::vector<dist::QuantileForecast> quantiles;  // empty for point-only models
  Matrix point;                                   // test days x 24
  bool deterministic = true;

  bool probabilistic() const { return !quantiles.empty(); }
};

/// Symmetric conformal bands: windows start from the last n_cal
/// calibration residuals of each hour and roll through the test days.
std::vector<dist::QuantileForecast> conformalize(std::span<const Date> test_days,
                                                 const Matrix& calibration_point,
                                                 const Matrix& calibration_actual,
                                                 const Matrix& test_point, const Matrix& test_actual,
                                                 int n_cal);

/// Fits models lazily and caches what several roster entries share (LEAR
/// members, trained networks of a run).
class Experiment {
 public:
  Experiment(config::ExperimentConfig cfg, PreparedData data, std::ostream* log = nullptr);

  const config::ExperimentConfig& config() const { return cfg_; }
  const PreparedData& data() const { return data_; }

  ModelForecast forecast(const std::string& model, int run);

  double lear_lambda();
  /// Rolling LEAR ensemble forecasts (EUR/MWh) for validation then test days.
  const std::vector<linear::LearEnsembleForecast>& lear_forecasts();
  /// Seed of stochastic run `run`.
  std::uint64_t run_seed(int run) const { return cfg_.seed + 1000ULL * static_cast<std::uint64_t>(run); }

 private:
  struct NeuralRun {
    std::vector<neural::MlpParams> members;  // DDNN = members[0]
    std::optional<neural::MlpParams> mcd;
  };
  struct Mixtures {
    Matrix point;  // days x 24
    std::vector<dist::QuantileForecast> quantiles;
  };

  void note(const std::string& message);
  Matrix lear_point(bool validation);
  const neural::TrainConfig& tuned_config(bool dropout);
  NeuralRun& neural_run(int run, int members, bool mcd);
  Mixtures predict_members(const std::vector<neural::MlpParams>& members, bool validation);
  Mixtures predict_mcd(const neural::MlpParams& net, int passes, std::uint64_t seed, bool validation);
  Matrix split_features(bool validation) const;

  config::ExperimentConfig cfg_;
  PreparedData data_;
  std::ostream* log_;
  std::optional<double> lambda_;
  std::vector<linear::LearEnsembleForecast> lear_;
  std::optional<neural::TrainConfig> tuned_plain_, tuned_dropout_;
  std::map<int, NeuralRun> neural_;
};

struct TradingSummary {
  double total_profit = 0.0;
  double total_profit_std = 0.0;
  double per_transaction_profit = 0.0;
  double trades = 0.0;
  double profitable_limit_days = 0.0;
};

struct ModelSummary {
  std::string model;
  bool probabilistic = true;
  bool deterministic = true;
  std::vector<metrics::MetricsReport> runs;
  metrics::MetricsReport mean;
  metrics::MetricsReport stddev;  // population std over runs
  Vector daily_crps;              // run-averaged, for the DM test
  std::map<int, TradingSummary> trading;
  TradingSummary unlimited;       // unlimited orders at forecast argmin / argmax
};

struct RunSummary {
  std::vector<ModelSummary> models;
  metrics::DmMatrix dm;
  double perfect_foresight = 0.0;
  TradingSummary fixed_hours;
  double lambda = 0.0;

  const ModelSummary* find(const std::string& model) const;
};

/// Whole experiment; writes reports under cfg.output_dir when `write` is set.
RunSummary run_pipeline(const config::ExperimentConfig& cfg, std::ostream* log = nullptr,
                        bool write = true);
RunSummary run_pipeline(const config::ExperimentConfig& cfg, PreparedData data,
                        std::ostream* log = nullptr, bool write = true);

/// table1.csv, coverage.csv, dm_statistic.csv, dm_pvalue.csv, trading.csv.
void write_reports(const RunSummary& summary, const std::string& dir);

}  // namespace probcast::pipeline
