// probcast command-line driver. Exit codes: 0 ok, 1 config, 2 data, 3 numerical.
#include "probcast/config.hpp"
#include "probcast/io.hpp"
#include "probcast/metrics.hpp"
#include "probcast/pipeline.hpp"
#include "probcast/synthetic.hpp"
#include "probcast/trading.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace probcast;

namespace {

struct Common {
  std::string config_path;
  std::string profile = "desk";
  std::string input;
  std::string output_dir;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON experiment config");
  cmd->add_option("--profile", c.profile, "base profile: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("-i,--input", c.input, "hourly CSV (overrides the config; default synthetic)");
  cmd->add_option("-o,--out", c.output_dir, "output directory");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress log");
}

config::ExperimentConfig resolve(const Common& c) {
  const config::ExperimentConfig base =
      c.profile == "paper" ? config::paper_config() : config::desk_config();
  config::ExperimentConfig cfg = c.config_path.empty() ? base : config::load_config(c.config_path, base);
  if (!c.input.empty()) cfg.input = c.input;
  if (!c.output_dir.empty()) cfg.output_dir = c.output_dir;
  cfg.validate();
  return cfg;
}

std::ostream* log_of(const Common& c) { return c.quiet ? nullptr : &std::cerr; }

void write_forecast(const pipeline::ModelForecast& f, const pipeline::PreparedData& data,
                    const std::string& dir) {
  io::PointForecasts pf{data.test_days, f.point};
  auto out = io::open_output(dir + "/forecasts/" + f.model + "_point.csv");
  io::write_point_csv(pf, out);
  std::cout << dir << "/forecasts/" << f.model << "_point.csv\n";
  if (f.probabilistic()) {
    auto q = io::open_output(dir + "/forecasts/" + f.model + "_quantiles.csv");
    dist::write_quantile_csv(f.quantiles, q);
    std::cout << dir << "/forecasts/" << f.model << "_quantiles.csv\n";
  }
}

// Fits one model and writes its test-period forecasts.
void forecast_model(const Common& c, const std::string& model, int run,
                    const std::function<void(config::ExperimentConfig&)>& tweak = {}) {
  auto cfg = resolve(c);
  if (tweak) tweak(cfg);
  cfg.validate();
  pipeline::Experiment ex(cfg, pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits),
                          log_of(c));
  const auto f = ex.forecast(model, run);
  write_forecast(f, ex.data(), cfg.output_dir);
  if (f.probabilistic()) {
    const auto rep = metrics::evaluate(f.quantiles, f.point, ex.data().test_actual);
    std::cout << model << ": MAE " << rep.mae << " RMSE " << rep.rmse << " CRPS " << rep.crps
              << " MAACE " << rep.maace << "\n";
  } else {
    const auto pe = metrics::mae_rmse(f.point, ex.data().test_actual);
    std::cout << model << ": MAE " << pe.mae << " RMSE " << pe.rmse << "\n";
  }
}

Matrix aligned_actual(const pipeline::PreparedData& data, std::span<const dist::QuantileForecast> qf) {
  Matrix a(static_cast<Eigen::Index>(qf.size()), kHours);
  for (std::size_t i = 0; i < qf.size(); ++i) {
    const auto row = data.dataset.find(qf[i].day);
    if (row < 0) throw DataError("no actual prices for " + qf[i].day.to_string());
    a.row(static_cast<Eigen::Index>(i)) = data.dataset.rows[static_cast<std::size_t>(row)].targets.transpose();
  }
  return a;
}

std::vector<dist::QuantileForecast> load_quantiles(const std::string& path) {
  auto in = io::open_input(path);
  return dist::read_quantile_csv(in, path);
}

Matrix load_point(const std::string& path, std::span<const dist::QuantileForecast> qf) {
  auto in = io::open_input(path);
  const auto p = io::read_point_csv(in, path);
  if (p.days.size() != qf.size()) throw DataError(path + ": day count differs from the quantiles");
  for (std::size_t i = 0; i < qf.size(); ++i) {
    if (p.days[i] != qf[i].day) throw DataError(path + ": days differ from the quantiles");
  }
  return p.values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"probcast: probabilistic day-ahead electricity price forecasting"};
  app.require_subcommand(1);
  Common c;
  int run = 0;

  auto* synth = app.add_subcommand("synth", "write the synthetic hourly series");
  add_common(synth, c);
  std::uint64_t synth_seed = 7;
  std::string synth_out = "synthetic.csv";
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("-f,--file", synth_out, "output CSV");

  auto* ingest = app.add_subcommand("ingest", "read a CSV, repair the DST clock, report gaps");
  add_common(ingest, c);
  std::string ingest_out = "normalized.csv";
  ingest->add_option("-f,--file", ingest_out, "normalized output CSV");

  auto* features = app.add_subcommand("features", "build the 151-column daily feature table");
  add_common(features, c);
  std::string features_out = "features.csv";
  features->add_option("-f,--file", features_out, "output CSV");

  auto* tune = app.add_subcommand("tune-lambda", "random search for the LEAR penalty");
  add_common(tune, c);

  struct Verb {
    const char* name;
    const char* model;
    const char* help;
  };
  const Verb fixed[] = {
      {"fit-lear", "LEAR", "rolling LEAR point forecasts"},
      {"fit-qra", "LEAR-QRA", "quantile regression averaging over LEAR members"},
      {"fit-garch", "LEAR-GARCH", "GARCH(1,1) intervals around LEAR"},
      {"conformalize", "LEAR-CP", "conformal intervals around LEAR (see --model)"},
      {"train-ddnn", "DDNN", "distributional network"},
  };
  std::map<CLI::App*, std::string> fixed_models;
  std::string cp_model = "LEAR-CP";
  for (const auto& v : fixed) {
    auto* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, c);
    cmd->add_option("--run", run, "run index (seed offset)");
    fixed_models[cmd] = v.model;
    if (std::string(v.name) == "conformalize") {
      cmd->add_option("--model", cp_model, "a *-CP model")->check([](const std::string& m) {
        return m.size() > 3 && m.substr(m.size() - 3) == "-CP" && config::is_known_model(m)
                   ? std::string()
                   : "not a conformal model: " + m;
      });
    }
  }

  auto* naive = app.add_subcommand("fit-naive", "naive forecast with historical-simulation errors");
  add_common(naive, c);
  std::string naive_source = "train";
  naive->add_option("--errors", naive_source, "error sample: train or val")
      ->check(CLI::IsMember({"train", "val"}));

  auto* ens = app.add_subcommand("train-ensemble", "deep ensemble of distributional networks");
  add_common(ens, c);
  int ens_n = 10;
  ens->add_option("--n", ens_n, "members")->check(CLI::IsMember({5, 10}));
  ens->add_option("--run", run, "run index (seed offset)");

  auto* mcd = app.add_subcommand("train-mcd", "Monte Carlo dropout network");
  add_common(mcd, c);
  int passes = 10;
  mcd->add_option("--passes", passes, "stochastic passes")->check(CLI::IsMember({10, 30}));
  mcd->add_option("--run", run, "run index (seed offset)");

  auto* hpo = app.add_subcommand("hpo", "hyperparameter search, then train DDNN");
  add_common(hpo, c);
  int hpo_trials = 20;
  hpo->add_option("--trials", hpo_trials, "random-search trials")->check(CLI::PositiveNumber);

  auto* fc = app.add_subcommand("forecast", "any model by name");
  add_common(fc, c);
  std::string fc_model;
  fc->add_option("-m,--model", fc_model, "model name")->required();
  fc->add_option("--run", run, "run index (seed offset)");

  auto* evaluate = app.add_subcommand("evaluate", "score a quantile CSV on the test actuals");
  add_common(evaluate, c);
  std::string eval_q, eval_p;
  evaluate->add_option("--quantiles", eval_q, "quantile CSV")->required();
  evaluate->add_option("--point", eval_p, "point CSV (default: median)");

  auto* dm = app.add_subcommand("dm", "Diebold-Mariano test on daily CRPS");
  add_common(dm, c);
  std::string dm_a, dm_b;
  dm->add_option("--a", dm_a, "quantile CSV of model A")->required();
  dm->add_option("--b", dm_b, "quantile CSV of model B")->required();

  auto* backtest = app.add_subcommand("backtest", "battery trading backtest");
  add_common(backtest, c);
  std::string bt_model = "LEAR-QRA";
  int bt_level = 50;
  backtest->add_option("-m,--model", bt_model, "probabilistic model");
  backtest->add_option("--level", bt_level, "interval level, percent")->check(CLI::Range(2, 98));
  backtest->add_option("--run", run, "run index (seed offset)");

  auto* runall = app.add_subcommand("run", "whole experiment with reports");
  add_common(runall, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      auto cfg = resolve(c);
      const auto series = synthetic::make_synthetic(cfg.synthetic, synth_seed);
      auto out = io::open_output(synth_out);
      data::write_series_csv(series, out);
      std::cout << synth_out << ": " << series.records.size() << " rows\n";
    } else if (ingest->parsed()) {
      auto cfg = resolve(c);
      const auto raw = pipeline::load_series(cfg);
      const auto norm = data::normalize_clock(raw);
      for (const auto& g : raw.gaps) {
        std::cerr << "gap: " << format_timestamp(g.timestamp) << " " << g.column << "\n";
      }
      auto out = io::open_output(ingest_out);
      data::write_series_csv(norm, out);
      std::cout << ingest_out << ": " << norm.records.size() << " rows, " << raw.gaps.size()
                << " gaps\n";
    } else if (features->parsed()) {
      auto cfg = resolve(c);
      const auto pd = pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits);
      auto out = io::open_output(features_out);
      data::write_dataset_csv(pd.dataset, out);
      std::cout << features_out << ": " << pd.dataset.size() << " days\n";
    } else if (tune->parsed()) {
      auto cfg = resolve(c);
      cfg.lear_lambda.reset();
      pipeline::Experiment ex(cfg, pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits),
                              log_of(c));
      std::cout << "lambda " << ex.lear_lambda() << "\n";
    } else if (naive->parsed()) {
      forecast_model(c, naive_source == "val" ? "Naive-HS_val" : "Naive-HS_train", 0);
    } else if (ens->parsed()) {
      forecast_model(c, "Ens" + std::to_string(ens_n), run);
    } else if (mcd->parsed()) {
      forecast_model(c, "MCD" + std::to_string(passes), run);
    } else if (hpo->parsed()) {
      forecast_model(c, "DDNN", 0, [&](config::ExperimentConfig& cfg) { cfg.hpo_trials = hpo_trials; });
    } else if (fc->parsed()) {
      forecast_model(c, fc_model, run);
    } else if (evaluate->parsed()) {
      auto cfg = resolve(c);
      const auto pd = pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits);
      const auto qf = load_quantiles(eval_q);
      const Matrix actual = aligned_actual(pd, qf);
      const Matrix point = eval_p.empty() ? Matrix() : load_point(eval_p, qf);
      const auto rep = metrics::evaluate(qf, point, actual);
      std::cout << "mae," << rep.mae << "\nrmse," << rep.rmse << "\ncrps," << rep.crps
                << "\nmaace," << rep.maace << "\n";
      for (const auto& [level, v] : rep.picp) {
        std::cout << "picp_" << level << "," << v << "\nmpiw_" << level << "," << rep.mpiw.at(level)
                  << "\n";
      }
    } else if (dm->parsed()) {
      auto cfg = resolve(c);
      const auto pd = pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits);
      const auto qa = load_quantiles(dm_a);
      const auto qb = load_quantiles(dm_b);
      if (qa.size() != qb.size()) throw DataError("dm: the two forecasts cover different days");
      for (std::size_t i = 0; i < qa.size(); ++i) {
        if (qa[i].day != qb[i].day) throw DataError("dm: the two forecasts cover different days");
      }
      const Matrix actual = aligned_actual(pd, qa);
      const auto r = metrics::dm_test(metrics::daily_crps(qa, actual), metrics::daily_crps(qb, actual));
      std::cout << "statistic," << r.statistic << "\np_value," << r.p_value << "\nmean_difference,"
                << r.mean_difference << "\nlag," << r.lag << "\n";
    } else if (backtest->parsed()) {
      auto cfg = resolve(c);
      pipeline::Experiment ex(cfg, pipeline::prepare_data(pipeline::load_series(cfg), cfg.splits),
                              log_of(c));
      const auto f = ex.forecast(bt_model, run);
      if (!f.probabilistic()) throw ConfigError("backtest needs a probabilistic model, got " + bt_model);
      const auto ledger =
          trading::backtest(f.quantiles, f.point, ex.data().test_actual, bt_level, cfg.battery);
      const std::string path =
          cfg.output_dir + "/ledgers/" + bt_model + "_L" + std::to_string(bt_level) + ".csv";
      auto out = io::open_output(path);
      trading::write_ledger_csv(ledger, out);
      std::cout << path << "\ntotal_profit," << ledger.total_profit << "\nper_transaction_profit,"
                << ledger.per_transaction_profit << "\ntrades," << ledger.trade_count()
                << "\nprofitable_limit_days," << ledger.profitable_limit_days
                << "\nperfect_foresight," << trading::perfect_foresight(ex.data().test_actual, cfg.battery)
                << "\n";
    } else if (runall->parsed()) {
      auto cfg = resolve(c);
      const auto s = pipeline::run_pipeline(cfg, log_of(c), true);
      std::cout << "reports in " << cfg.output_dir << "\n";
      for (const auto& m : s.models) {
        std::cout << m.model << ": MAE " << m.mean.mae;
        if (m.probabilistic) std::cout << " CRPS " << m.mean.crps << " MAACE " << m.mean.maace;
        std::cout << "\n";
      }
    } else {
      for (const auto& [cmd, model] : fixed_models) {
        if (cmd->parsed()) forecast_model(c, model == "LEAR-CP" ? cp_model : model, run);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
