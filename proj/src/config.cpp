#include "probcast/config.hpp"

#include "probcast/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace probcast::config {
namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

DateRange read_range(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string()) {
    throw ConfigError(where + ": expected [\"YYYY-MM-DD\", \"YYYY-MM-DD\"]");
  }
  try {
    return {Date::parse(j[0].get<std::string>()), Date::parse(j[1].get<std::string>())};
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

void read_synthetic(const json& j, ExperimentConfig& c) {
  only_keys(j, "data.synthetic",
            {"start", "days", "seed", "level", "hourly_amplitude", "weekend_drop", "load_effect",
             "renewable_effect", "ar1", "ar2", "ar7", "garch_omega", "garch_alpha", "garch_beta",
             "hour_heteroscedasticity", "regime_day", "regime_scale", "spike_probability",
             "spike_mean", "load_noise", "renewable_noise", "exogenous", "dst_rule"});
  auto& s = c.synthetic;
  const std::string w = "data.synthetic";
  if (j.contains("start")) {
    std::string text;
    read(j, "start", text, w);
    try {
      s.start = Date::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(w + ".start: " + e.what());
    }
  }
  read(j, "days", s.days, w);
  read(j, "seed", c.synthetic_seed, w);
  read(j, "level", s.level, w);
  read(j, "hourly_amplitude", s.hourly_amplitude, w);
  read(j, "weekend_drop", s.weekend_drop, w);
  read(j, "load_effect", s.load_effect, w);
  read(j, "renewable_effect", s.renewable_effect, w);
  read(j, "ar1", s.ar1, w);
  read(j, "ar2", s.ar2, w);
  read(j, "ar7", s.ar7, w);
  read(j, "garch_omega", s.garch_omega, w);
  read(j, "garch_alpha", s.garch_alpha, w);
  read(j, "garch_beta", s.garch_beta, w);
  read(j, "hour_heteroscedasticity", s.hour_heteroscedasticity, w);
  read(j, "regime_day", s.regime_day, w);
  read(j, "regime_scale", s.regime_scale, w);
  read(j, "spike_probability", s.spike_probability, w);
  read(j, "spike_mean", s.spike_mean, w);
  read(j, "load_noise", s.load_noise, w);
  read(j, "renewable_noise", s.renewable_noise, w);
  read(j, "exogenous", s.exogenous, w);
  if (j.contains("dst_rule")) {
    std::string rule;
    read(j, "dst_rule", rule, w);
    const auto r = parse_dst_rule(rule);
    if (!r) throw ConfigError(w + ".dst_rule: unknown rule '" + rule + "'");
    s.dst_rule = *r;
  }
}

}  // namespace

const std::vector<std::string>& known_models() {
  static const std::vector<std::string> names = {
      "Naive-HS_train", "Naive-HS_val", "LEAR",  "LEAR-QRA", "LEAR-GARCH",
      "LEAR-CP",        "DDNN",         "Ens5",  "Ens10",    "MCD10",
      "MCD30",          "DDNN-CP",      "Ens10-CP", "MCD30-CP"};
  return names;
}

bool is_known_model(const std::string& name) {
  const auto& k = known_models();
  return std::find(k.begin(), k.end(), name) != k.end();
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw ConfigError("models: roster is empty");
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (!is_known_model(m)) throw ConfigError("models: unknown model '" + m + "'");
    if (!seen.insert(m).second) throw ConfigError("models: '" + m + "' listed twice");
  }
  if (runs < 1) throw ConfigError("runs must be >= 1");
  for (const DateRange* r : {&splits.train, &splits.validation, &splits.test}) {
    if (r->last < r->first) throw ConfigError("splits: range ends before it starts");
  }
  if (!(splits.train.last < splits.validation.first) ||
      !(splits.validation.last < splits.test.first)) {
    throw ConfigError("splits: ranges must be ordered train < validation < test without overlap");
  }
  if (lear_windows.empty()) throw ConfigError("lear.windows: at least one window required");
  for (int w : lear_windows) {
    if (w < 2) throw ConfigError("lear.windows: windows must be >= 2 days");
  }
  if (lear_lambda && !(*lear_lambda >= 0.0)) throw ConfigError("lear.lambda must be >= 0");
  if (lambda_trials < 1) throw ConfigError("lear.lambda_trials must be >= 1");
  if (!(lambda_low > 0.0) || !(lambda_high >= lambda_low)) {
    throw ConfigError("lear.lambda_range must satisfy 0 < low <= high");
  }
  if (n_cal < 1) throw ConfigError("conformal.n_cal must be >= 1");
  if (garch_restarts < 0) throw ConfigError("garch.restarts must be >= 0");
  neural::TrainConfig check = nn;
  check.dropout_rate = 0.0;
  check.validate();
  if (!(mcd_dropout >= 0.01 && mcd_dropout <= 0.9)) {
    throw ConfigError("neural.mcd_dropout must lie in [0.01, 0.9]");
  }
  if (hpo_trials < 0) throw ConfigError("neural.hpo_trials must be >= 0");
  if (validation_passes < 1) throw ConfigError("neural.validation_passes must be >= 1");
  if (!(battery.efficiency > 0.0 && battery.efficiency <= 1.0)) {
    throw ConfigError("trading.efficiency must lie in (0, 1]");
  }
  for (const auto* levels : {&trading_levels, &ledger_levels}) {
    for (int l : *levels) {
      if (l < 2 || l > 98 || l % 2 != 0) {
        throw ConfigError("trading levels must be even percentages in [2, 98]");
      }
    }
  }
  if (input.empty()) synthetic.validate();
}

ExperimentConfig paper_config() {
  ExperimentConfig c;
  c.splits = {{Date::from_ymd(2018, 10, 12), Date::from_ymd(2022, 11, 30)},
              {Date::from_ymd(2022, 12, 1), Date::from_ymd(2023, 11, 30)},
              {Date::from_ymd(2023, 12, 1), Date::from_ymd(2024, 11, 30)}};
  c.synthetic.start = Date::from_ymd(2018, 10, 1);
  c.synthetic.days = static_cast<int>(Date::from_ymd(2024, 11, 30) - c.synthetic.start) + 1;
  c.synthetic.regime_day = static_cast<int>(Date::from_ymd(2022, 11, 1) - c.synthetic.start);
  c.models = known_models();
  c.runs = 10;
  c.lear_windows = {56, 84, 1092, 1461};
  c.lambda_trials = 200;
  c.nn = neural::TrainConfig::paper_profile();
  c.trading_levels = metrics::level_grid();
  return c;
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.splits = {{Date::from_ymd(2021, 1, 8), Date::from_ymd(2022, 1, 31)},
              {Date::from_ymd(2022, 2, 1), Date::from_ymd(2022, 10, 31)},
              {Date::from_ymd(2022, 11, 1), Date::from_ymd(2023, 6, 19)}};
  c.models = known_models();
  c.runs = 3;
  c.lear_windows = {56, 84, 182, 364};
  c.lambda_trials = 20;
  // Small penalties crawl on a 364-row window and lose on validation anyway.
  c.lambda_low = 1e-2;
  c.nn = neural::TrainConfig::desk_profile();
  c.nn.learning_rate = 1e-3;
  c.nn.l2 = 1e-4;
  c.trading_levels = metrics::level_grid();
  return c;
}

ExperimentConfig parse_config(const std::string& json_text, const ExperimentConfig& base_in) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"profile", "data", "splits", "output_dir", "models", "runs", "seed", "lear",
             "conformal", "naive", "garch", "neural", "trading"});
  ExperimentConfig c = base_in;
  if (j.contains("profile")) {
    std::string profile;
    read(j, "profile", profile, "config");
    if (profile == "desk") c = desk_config();
    else if (profile == "paper") c = paper_config();
    else throw ConfigError("profile must be 'desk' or 'paper'");
  }

  if (j.contains("data")) {
    const json& d = j["data"];
    only_keys(d, "data", {"input", "schema", "synthetic"});
    read(d, "input", c.input, "data");
    if (d.contains("schema")) {
      const json& s = d["schema"];
      only_keys(s, "data.schema",
                {"timestamp", "price", "load_forecast", "renewable_forecast", "dst_rule"});
      read(s, "timestamp", c.schema.timestamp, "data.schema");
      read(s, "price", c.schema.price, "data.schema");
      read(s, "load_forecast", c.schema.load_forecast, "data.schema");
      read(s, "renewable_forecast", c.schema.renewable_forecast, "data.schema");
      if (s.contains("dst_rule")) {
        std::string rule;
        read(s, "dst_rule", rule, "data.schema");
        const auto r = parse_dst_rule(rule);
        if (!r) throw ConfigError("data.schema.dst_rule: unknown rule '" + rule + "'");
        c.schema.dst_rule = *r;
      }
    }
    if (d.contains("synthetic")) read_synthetic(d["synthetic"], c);
  }
  if (j.contains("splits")) {
    const json& s = j["splits"];
    only_keys(s, "splits", {"train", "validation", "test"});
    if (s.contains("train")) c.splits.train = read_range(s["train"], "splits.train");
    if (s.contains("validation")) c.splits.validation = read_range(s["validation"], "splits.validation");
    if (s.contains("test")) c.splits.test = read_range(s["test"], "splits.test");
  }
  read(j, "output_dir", c.output_dir, "config");
  read(j, "models", c.models, "config");
  read(j, "runs", c.runs, "config");
  read(j, "seed", c.seed, "config");
  if (j.contains("lear")) {
    const json& l = j["lear"];
    only_keys(l, "lear", {"windows", "lambda", "lambda_trials", "lambda_range"});
    read(l, "windows", c.lear_windows, "lear");
    if (l.contains("lambda")) {
      if (l["lambda"].is_null()) c.lear_lambda.reset();
      else {
        double v = 0.0;
        read(l, "lambda", v, "lear");
        c.lear_lambda = v;
      }
    }
    read(l, "lambda_trials", c.lambda_trials, "lear");
    if (l.contains("lambda_range")) {
      std::vector<double> r;
      read(l, "lambda_range", r, "lear");
      if (r.size() != 2) throw ConfigError("lear.lambda_range must be [low, high]");
      c.lambda_low = r[0];
      c.lambda_high = r[1];
    }
  }
  if (j.contains("conformal")) {
    only_keys(j["conformal"], "conformal", {"n_cal"});
    read(j["conformal"], "n_cal", c.n_cal, "conformal");
  }
  if (j.contains("naive")) {
    only_keys(j["naive"], "naive", {"hs_per_hour"});
    read(j["naive"], "hs_per_hour", c.hs_per_hour, "naive");
  }
  if (j.contains("garch")) {
    only_keys(j["garch"], "garch", {"restarts"});
    read(j["garch"], "restarts", c.garch_restarts, "garch");
  }
  if (j.contains("neural")) {
    const json& n = j["neural"];
    only_keys(n, "neural",
              {"hidden_units", "learning_rate", "l2", "mcd_dropout", "batch_size", "max_epochs",
               "patience", "validation_passes", "hpo_trials"});
    read(n, "hidden_units", c.nn.hidden_units, "neural");
    read(n, "learning_rate", c.nn.learning_rate, "neural");
    read(n, "l2", c.nn.l2, "neural");
    read(n, "mcd_dropout", c.mcd_dropout, "neural");
    read(n, "batch_size", c.nn.batch_size, "neural");
    read(n, "max_epochs", c.nn.max_epochs, "neural");
    read(n, "patience", c.nn.patience, "neural");
    read(n, "validation_passes", c.validation_passes, "neural");
    read(n, "hpo_trials", c.hpo_trials, "neural");
  }
  if (j.contains("trading")) {
    const json& t = j["trading"];
    only_keys(t, "trading", {"efficiency", "levels", "ledger_levels"});
    read(t, "efficiency", c.battery.efficiency, "trading");
    read(t, "levels", c.trading_levels, "trading");
    read(t, "ledger_levels", c.ledger_levels, "trading");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), base);
}

}  // namespace probcast::config
