#pragma once

#include "probcast/data.hpp"
#include "probcast/neural.hpp"
#include "probcast/synthetic.hpp"
#include "probcast/trading.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace probcast::config {

/// Every model the pipeline knows, in report order.
const std::vector<std::string>& known_models();
bool is_known_model(const std::string& name);

struct ExperimentConfig {
  // Data: a CSV path, or the synthetic generator when empty.
  std::string input;
  data::CsvSchema schema;
  synthetic::SyntheticSpec synthetic;
  std::uint64_t synthetic_seed = 7;

  data::SplitBoundaries splits;
  std::string output_dir = "out";

  std::vector<std::string> models;
  int runs = 10;
  std::uint64_t seed = 42;

  std::vector<int> lear_windows = {56, 84, 1092, 1461};
  std::optional<double> lear_lambda;  // unset: tuned on the validation split
  int lambda_trials = 200;
  double lambda_low = 1e-5;  // log-uniform search range
  double lambda_high = 1e-1;

  int n_cal = 182;
  bool hs_per_hour = false;
  int garch_restarts = 5;

  neural::TrainConfig nn = neural::TrainConfig::paper_profile();  // dropout_rate unused
  double mcd_dropout = 0.2;
  int hpo_trials = 0;  // > 0: random search before training
  int validation_passes = 10;

  trading::BatteryParams battery;
  std::vector<int> trading_levels;  // defaults to 2:98:2
  std::vector<int> ledger_levels = {50};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Paper-faithful splits and windows.
ExperimentConfig paper_config();
/// Desk-scale profile on the built-in 900-day synthetic series.
ExperimentConfig desk_config();

/// Reads a JSON document. Keys absent from the file keep the values of
/// `base`; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = desk_config());
ExperimentConfig parse_config(const std::string& json_text,
                              const ExperimentConfig& base = desk_config());

}  // namespace probcast::config
