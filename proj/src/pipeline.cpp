#include "probcast/pipeline.hpp"

#include "probcast/baseline.hpp"
#include "probcast/csv.hpp"
#include "probcast/conformal.hpp"
#include "probcast/io.hpp"
#include "probcast/quantreg.hpp"
#include "probcast/synthetic.hpp"
#include "probcast/trading.hpp"
#include "probcast/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace probcast::pipeline {
namespace {

// Runs `f`, prefixing any failure with the stage name.
template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError("stage " + name + ": " + e.what());
  }
}

Matrix actual_matrix(const data::FeatureDataset& ds, const std::vector<Date>& days) {
  Matrix m(static_cast<Eigen::Index>(days.size()), kHours);
  for (std::size_t i = 0; i < days.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) =
        ds.rows[static_cast<std::size_t>(ds.find(days[i]))].targets.transpose();
  }
  return m;
}

std::vector<Date> split_days(const data::FeatureDataset& ds, data::Split s) {
  std::vector<Date> days;
  for (std::size_t i : ds.indices(s)) days.push_back(ds.rows[i].date);
  return days;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

int count_suffix(const std::string& model, const std::string& prefix) {
  return std::stoi(model.substr(prefix.size()));
}

dist::QuantileForecast gaussian_day(Date day, const Vector& mean, const Vector& variance) {
  return dist::to_quantile_forecast(day, dist::GaussianOutput{mean, variance});
}

}  // namespace

data::MarketSeries load_series(const config::ExperimentConfig& cfg) {
  if (!cfg.input.empty()) return data::ingest_csv(cfg.input, cfg.schema);
  return synthetic::make_synthetic(cfg.synthetic, cfg.synthetic_seed);
}

PreparedData prepare_data(const data::MarketSeries& raw, const data::SplitBoundaries& splits) {
  PreparedData p;
  p.normalized = data::normalize_clock(raw);
  p.dataset = data::split_by_dates(data::build_features(p.normalized), splits);
  p.standardizer = data::fit_standardizer(p.dataset, true);
  p.standardized = p.standardizer.transform(p.dataset);
  p.validation_days = split_days(p.dataset, data::Split::kValidation);
  p.test_days = split_days(p.dataset, data::Split::kTest);
  if (p.validation_days.empty() || p.test_days.empty()) {
    throw DataError("validation and test splits must both contain complete days");
  }
  p.validation_actual = actual_matrix(p.dataset, p.validation_days);
  p.test_actual = actual_matrix(p.dataset, p.test_days);
  return p;
}

std::vector<dist::QuantileForecast> conformalize(std::span<const Date> test_days,
                                                 const Matrix& calibration_point,
                                                 const Matrix& calibration_actual,
                                                 const Matrix& test_point, const Matrix& test_actual,
                                                 int n_cal) {
  std::vector<conformal::ScoreWindow> windows;
  for (int h = 0; h < kHours; ++h) {
    conformal::ScoreWindow w(n_cal, h);
    const Eigen::Index start = std::max<Eigen::Index>(0, calibration_point.rows() - n_cal);
    for (Eigen::Index d = start; d < calibration_point.rows(); ++d) {
      w.roll(conformal::nonconformity(calibration_point(d, h), calibration_actual(d, h)));
    }
    windows.push_back(std::move(w));
  }
  std::vector<dist::QuantileForecast> out;
  for (std::size_t i = 0; i < test_days.size(); ++i) {
    const auto d = static_cast<Eigen::Index>(i);
    dist::QuantileForecast qf;
    qf.day = test_days[i];
    for (int h = 0; h < kHours; ++h) {
      qf.values.row(h) = conformal::conformal_quantiles(test_point(d, h), windows[h]);
      windows[h].roll(conformal::nonconformity(test_point(d, h), test_actual(d, h)));
    }
    out.push_back(std::move(qf));
  }
  return out;
}

Experiment::Experiment(config::ExperimentConfig cfg, PreparedData data, std::ostream* log)
    : cfg_(std::move(cfg)), data_(std::move(data)), log_(log) {}

void Experiment::note(const std::string& message) {
  if (log_) *log_ << "[probcast] " << message << std::endl;
}

double Experiment::lear_lambda() {
  if (lambda_) return *lambda_;
  if (cfg_.lear_lambda) {
    lambda_ = *cfg_.lear_lambda;
  } else {
    linear::LambdaSearch search;
    search.trials = cfg_.lambda_trials;
    search.low = cfg_.lambda_low;
    search.high = cfg_.lambda_high;
    search.seed = cfg_.seed;
    search.window = *std::max_element(cfg_.lear_windows.begin(), cfg_.lear_windows.end());
    const auto r = stage("tune-lambda", [&] { return linear::tune_lambda(data_.standardized, search); });
    lambda_ = r.lambda;
    note("lambda = " + std::to_string(r.lambda) + " (validation MAE " +
         std::to_string(r.validation_mae) + ", standardized units)");
  }
  return *lambda_;
}

const std::vector<linear::LearEnsembleForecast>& Experiment::lear_forecasts() {
  if (!lear_.empty()) return lear_;
  const double lambda = lear_lambda();
  std::vector<Date> days = data_.validation_days;
  days.insert(days.end(), data_.test_days.begin(), data_.test_days.end());
  note("LEAR rolling forecasts for " + std::to_string(days.size()) + " days");
  lear_ = stage("fit-lear", [&] {
    linear::LearForecaster engine(cfg_.lear_windows, lambda);
    return engine.forecast(data_.standardized, days);
  });
  // Back to EUR/MWh.
  const auto& sd = data_.standardizer;
  for (auto& f : lear_) {
    for (int h = 0; h < kHours; ++h) {
      f.members.row(h) = f.members.row(h).array() * sd.target_std(h) + sd.target_mean(h);
    }
    f.mean = f.members.rowwise().mean();
  }
  return lear_;
}

Matrix Experiment::lear_point(bool validation) {
  const auto& f = lear_forecasts();
  const std::size_t nv = data_.validation_days.size();
  const std::size_t first = validation ? 0 : nv;
  const std::size_t count = validation ? nv : data_.test_days.size();
  Matrix m(static_cast<Eigen::Index>(count), kHours);
  for (std::size_t i = 0; i < count; ++i) m.row(static_cast<Eigen::Index>(i)) = f[first + i].mean.transpose();
  return m;
}

Matrix Experiment::split_features(bool validation) const {
  const auto& days = validation ? data_.validation_days : data_.test_days;
  Matrix x(static_cast<Eigen::Index>(days.size()), kNumFeatures);
  for (std::size_t i = 0; i < days.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        data_.standardized.rows[static_cast<std::size_t>(data_.standardized.find(days[i]))]
            .features.transpose();
  }
  return x;
}

const neural::TrainConfig& Experiment::tuned_config(bool dropout) {
  auto& slot = dropout ? tuned_dropout_ : tuned_plain_;
  if (slot) return *slot;
  neural::TrainConfig base = cfg_.nn;
  base.dropout_rate = dropout ? cfg_.mcd_dropout : 0.0;
  base.validation_passes = cfg_.validation_passes;
  base.seed = cfg_.seed;
  if (cfg_.hpo_trials > 0) {
    const auto train_idx = data_.standardized.indices(data::Split::kTrain);
    const auto val_idx = data_.standardized.indices(data::Split::kValidation);
    note(std::string("hyperparameter search (") + (dropout ? "dropout" : "plain") + ")");
    const auto r = stage("hpo", [&] {
      return neural::random_search(
          data_.standardized.feature_matrix(train_idx), data_.standardized.target_matrix(train_idx),
          data_.standardized.feature_matrix(val_idx), data_.standardized.target_matrix(val_idx),
          base, dropout, cfg_.hpo_trials, cfg_.seed + 17);
    });
    base = r.best;
  }
  slot = base;
  return *slot;
}

Experiment::NeuralRun& Experiment::neural_run(int run, int members, bool mcd) {
  NeuralRun& nr = neural_[run];
  const auto train_idx = data_.standardized.indices(data::Split::kTrain);
  const auto val_idx = data_.standardized.indices(data::Split::kValidation);
  const Matrix xt = data_.standardized.feature_matrix(train_idx);
  const Matrix yt = data_.standardized.target_matrix(train_idx);
  const Matrix xv = data_.standardized.feature_matrix(val_idx);
  const Matrix yv = data_.standardized.target_matrix(val_idx);
  while (static_cast<int>(nr.members.size()) < members) {
    neural::TrainConfig c = tuned_config(false);
    c.seed = run_seed(run) + nr.members.size();
    note("train network run " + std::to_string(run) + " member " + std::to_string(nr.members.size()));
    auto res = stage("train-ddnn", [&] { return neural::train(xt, yt, xv, yv, c); });
    nr.members.push_back(std::move(res.params));
  }
  if (mcd && !nr.mcd) {
    neural::TrainConfig c = tuned_config(true);
    c.seed = run_seed(run) + 500;
    note("train MC-dropout network run " + std::to_string(run));
    auto res = stage("train-mcd", [&] { return neural::train(xt, yt, xv, yv, c); });
    nr.mcd = std::move(res.params);
  }
  return nr;
}

Experiment::Mixtures Experiment::predict_members(const std::vector<neural::MlpParams>& members,
                                                 bool validation) {
  const auto& days = validation ? data_.validation_days : data_.test_days;
  const Matrix x = split_features(validation);
  const auto& sd = data_.standardizer;
  Mixtures out;
  out.point.resize(x.rows(), kHours);
  if (members.size() == 1) {
    const auto g = neural::forward(members[0], Eigen::Ref<const Matrix>(Matrix(x.transpose())));
    for (Eigen::Index d = 0; d < x.rows(); ++d) {
      Vector mean(kHours), var(kHours);
      for (int h = 0; h < kHours; ++h) {
        mean(h) = g.mean(h, d) * sd.target_std(h) + sd.target_mean(h);
        var(h) = std::exp(g.logvar(h, d)) * sd.target_std(h) * sd.target_std(h);
      }
      out.point.row(d) = mean.transpose();
      out.quantiles.push_back(gaussian_day(days[static_cast<std::size_t>(d)], mean, var));
    }
    return out;
  }
  for (Eigen::Index d = 0; d < x.rows(); ++d) {
    auto mix = neural::ensemble_predict(members, x.row(d).transpose());
    for (int h = 0; h < kHours; ++h) {
      mix[h].means = mix[h].means.array() * sd.target_std(h) + sd.target_mean(h);
      mix[h].stddevs *= sd.target_std(h);
      out.point(d, h) = mix[h].mean();
    }
    out.quantiles.push_back(
        dist::to_quantile_forecast(days[static_cast<std::size_t>(d)], dist::MixtureOutput{mix}));
  }
  return out;
}

Experiment::Mixtures Experiment::predict_mcd(const neural::MlpParams& net, int passes,
                                             std::uint64_t seed, bool validation) {
  const auto& days = validation ? data_.validation_days : data_.test_days;
  const Matrix x = split_features(validation);
  const auto& sd = data_.standardizer;
  Mixtures out;
  out.point.resize(x.rows(), kHours);
  for (Eigen::Index d = 0; d < x.rows(); ++d) {
    const std::uint64_t day_seed =
        seed + static_cast<std::uint64_t>(days[static_cast<std::size_t>(d)].days()) * 1000ULL;
    auto mix = neural::mc_dropout_predict(net, x.row(d).transpose(), passes, cfg_.mcd_dropout, day_seed);
    for (int h = 0; h < kHours; ++h) {
      mix[h].means = mix[h].means.array() * sd.target_std(h) + sd.target_mean(h);
      mix[h].stddevs *= sd.target_std(h);
      out.point(d, h) = mix[h].mean();
    }
    out.quantiles.push_back(
        dist::to_quantile_forecast(days[static_cast<std::size_t>(d)], dist::MixtureOutput{mix}));
  }
  return out;
}

ModelForecast Experiment::forecast(const std::string& model, int run) {
  if (!config::is_known_model(model)) throw ConfigError("unknown model '" + model + "'");
  ModelForecast f;
  f.model = model;
  const auto& test_days = data_.test_days;

  if (starts_with(model, "Naive-HS")) {
    return stage("fit-naive", [&] {
      const bool use_val = model == "Naive-HS_val";
      const auto& ds = data_.dataset;
      const auto fit_idx = ds.indices(use_val ? data::Split::kValidation : data::Split::kTrain);
      std::vector<std::vector<double>> errors(kHours);
      std::vector<double> pooled;
      for (std::size_t i : fit_idx) {
        const Vector naive = baseline::naive_forecast(ds.rows[i]);
        for (int h = 0; h < kHours; ++h) {
          const double e = ds.rows[i].targets(h) - naive(h);
          errors[h].push_back(e);
          pooled.push_back(e);
        }
      }
      const auto split = use_val ? data::Split::kValidation : data::Split::kTrain;
      std::vector<baseline::HistoricalSimulation> hs;
      for (int h = 0; h < kHours; ++h) {
        hs.push_back(cfg_.hs_per_hour ? baseline::fit_hs(errors[h], split)
                                      : (h == 0 ? baseline::fit_hs(pooled, split) : hs.front()));
      }
      f.point.resize(static_cast<Eigen::Index>(test_days.size()), kHours);
      for (std::size_t i = 0; i < test_days.size(); ++i) {
        const Vector naive =
            baseline::naive_forecast(ds.rows[static_cast<std::size_t>(ds.find(test_days[i]))]);
        dist::QuantileForecast qf;
        qf.day = test_days[i];
        for (int h = 0; h < kHours; ++h) qf.values.row(h) = baseline::hs_quantiles(naive(h), hs[h]);
        f.point.row(static_cast<Eigen::Index>(i)) = naive.transpose();
        f.quantiles.push_back(std::move(qf));
      }
      return f;
    });
  }

  if (starts_with(model, "LEAR")) {
    const Matrix val_point = lear_point(true);
    f.point = lear_point(false);
    if (model == "LEAR") return f;
    if (model == "LEAR-QRA") {
      return stage("fit-qra", [&] {
        const auto& lf = lear_forecasts();
        const std::vector<linear::LearEnsembleForecast> val(lf.begin(),
                                                            lf.begin() + static_cast<std::ptrdiff_t>(data_.validation_days.size()));
        const auto models = quantreg::fit_qra(val, data_.validation_actual);
        for (std::size_t i = 0; i < test_days.size(); ++i) {
          f.quantiles.push_back(quantreg::qra_forecast(models, lf[val.size() + i]));
        }
        return f;
      });
    }
    if (model == "LEAR-GARCH") {
      return stage("fit-garch", [&] {
        const Matrix val_res = data_.validation_actual - val_point;
        std::vector<volatility::GarchFilter> filters;
        for (int h = 0; h < kHours; ++h) {
          volatility::GarchFitOptions opt;
          opt.restarts = cfg_.garch_restarts;
          opt.seed = cfg_.seed + static_cast<std::uint64_t>(h);
          const Vector r = val_res.col(h);
          filters.emplace_back(volatility::fit_garch(r, h, opt), r);
        }
        for (std::size_t i = 0; i < test_days.size(); ++i) {
          const auto d = static_cast<Eigen::Index>(i);
          Vector var(kHours);
          for (int h = 0; h < kHours; ++h) {
            var(h) = filters[h].next_variance();
            filters[h].update(data_.test_actual(d, h) - f.point(d, h));
          }
          f.quantiles.push_back(gaussian_day(test_days[i], f.point.row(d).transpose(), var));
        }
        return f;
      });
    }
    f.quantiles = stage("conformalize", [&] {
      return conformalize(test_days, val_point, data_.validation_actual, f.point,
                          data_.test_actual, cfg_.n_cal);
    });
    return f;
  }

  f.deterministic = false;
  const bool cp = model.size() > 3 && model.substr(model.size() - 3) == "-CP";
  const std::string base = cp ? model.substr(0, model.size() - 3) : model;

  Mixtures test, val;
  if (base == "DDNN" || starts_with(base, "Ens")) {
    const int n = base == "DDNN" ? 1 : count_suffix(base, "Ens");
    NeuralRun& nr = neural_run(run, n, false);
    const std::vector<neural::MlpParams> members(nr.members.begin(), nr.members.begin() + n);
    test = stage("forecast", [&] { return predict_members(members, false); });
    if (cp) val = stage("forecast", [&] { return predict_members(members, true); });
  } else {
    const int passes = count_suffix(base, "MCD");
    NeuralRun& nr = neural_run(run, 0, true);
    const std::uint64_t seed = run_seed(run) + 777;
    test = stage("forecast", [&] { return predict_mcd(*nr.mcd, passes, seed, false); });
    if (cp) val = stage("forecast", [&] { return predict_mcd(*nr.mcd, passes, seed, true); });
  }
  f.point = test.point;
  if (!cp) {
    f.quantiles = std::move(test.quantiles);
    return f;
  }
  f.quantiles = stage("conformalize", [&] {
    return conformalize(test_days, val.point, data_.validation_actual, f.point, data_.test_actual,
                        cfg_.n_cal);
  });
  return f;
}

const ModelSummary* RunSummary::find(const std::string& model) const {
  for (const auto& m : models) {
    if (m.model == model) return &m;
  }
  return nullptr;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

void aggregate(ModelSummary& s) {
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& r : s.runs) v.push_back(getter(r));
    return v;
  };
  auto fill = [&](auto getter, double& mean, double& sd) {
    const auto v = collect(getter);
    mean = mean_of(v);
    sd = std_of(v);
  };
  fill([](const metrics::MetricsReport& r) { return r.mae; }, s.mean.mae, s.stddev.mae);
  fill([](const metrics::MetricsReport& r) { return r.rmse; }, s.mean.rmse, s.stddev.rmse);
  if (!s.probabilistic) return;
  fill([](const metrics::MetricsReport& r) { return r.crps; }, s.mean.crps, s.stddev.crps);
  fill([](const metrics::MetricsReport& r) { return r.maace; }, s.mean.maace, s.stddev.maace);
  for (int level : metrics::level_grid()) {
    fill([&](const metrics::MetricsReport& r) { return r.picp.at(level); }, s.mean.picp[level],
         s.stddev.picp[level]);
    fill([&](const metrics::MetricsReport& r) { return r.mpiw.at(level); }, s.mean.mpiw[level],
         s.stddev.mpiw[level]);
  }
}

TradingSummary summarize(const std::vector<trading::TradeLedger>& ledgers) {
  std::vector<double> total, per, trades, days;
  for (const auto& l : ledgers) {
    total.push_back(l.total_profit);
    per.push_back(l.per_transaction_profit);
    trades.push_back(l.trade_count());
    days.push_back(l.profitable_limit_days);
  }
  return {mean_of(total), std_of(total), mean_of(per), mean_of(trades), mean_of(days)};
}

}  // namespace

RunSummary run_pipeline(const config::ExperimentConfig& cfg, std::ostream* log, bool write) {
  cfg.validate();
  PreparedData data = stage("ingest", [&] { return prepare_data(load_series(cfg), cfg.splits); });
  return run_pipeline(cfg, std::move(data), log, write);
}

RunSummary run_pipeline(const config::ExperimentConfig& cfg, PreparedData data, std::ostream* log,
                        bool write) {
  cfg.validate();
  Experiment ex(cfg, std::move(data), log);
  const auto& pd = ex.data();
  const std::vector<int> levels = cfg.trading_levels.empty() ? metrics::level_grid() : cfg.trading_levels;
  const std::string dir = cfg.output_dir;

  RunSummary summary;
  summary.perfect_foresight = trading::perfect_foresight(pd.test_actual, cfg.battery);
  summary.fixed_hours =
      summarize({trading::fixed_hours_backtest(pd.test_days, pd.test_actual, cfg.battery)});

  for (const auto& name : cfg.models) {
    ModelSummary ms;
    ms.model = name;
    std::vector<Vector> daily;
    std::map<int, std::vector<trading::TradeLedger>> ledgers;
    std::vector<trading::TradeLedger> unlimited;
    int runs = cfg.runs;
    for (int r = 0; r < runs; ++r) {
      const ModelForecast f = ex.forecast(name, r);
      ms.deterministic = f.deterministic;
      ms.probabilistic = f.probabilistic();
      metrics::MetricsReport rep;
      if (f.probabilistic()) {
        rep = stage("evaluate", [&] { return metrics::evaluate(f.quantiles, f.point, pd.test_actual); });
        daily.push_back(metrics::daily_crps(f.quantiles, pd.test_actual));
        stage("backtest", [&] {
          for (int level : levels) {
            ledgers[level].push_back(trading::backtest(f.quantiles, f.point, pd.test_actual, level, cfg.battery));
          }
        });
      } else {
        const auto pe = metrics::mae_rmse(f.point, pd.test_actual);
        rep.mae = pe.mae;
        rep.rmse = pe.rmse;
      }
      unlimited.push_back(trading::unlimited_backtest(pd.test_days, f.point, pd.test_actual, cfg.battery));
      if (write && r == 0) {
        io::PointForecasts pf{pd.test_days, f.point};
        auto out = io::open_output(dir + "/forecasts/" + name + "_point.csv");
        io::write_point_csv(pf, out);
        if (f.probabilistic()) {
          auto q = io::open_output(dir + "/forecasts/" + name + "_quantiles.csv");
          dist::write_quantile_csv(f.quantiles, q);
          for (int level : cfg.ledger_levels) {
            const auto ledger = trading::backtest(f.quantiles, f.point, pd.test_actual, level, cfg.battery);
            auto lo = io::open_output(dir + "/ledgers/" + name + "_L" + std::to_string(level) + ".csv");
            trading::write_ledger_csv(ledger, lo);
          }
        }
      }
      ms.runs.push_back(std::move(rep));
      if (f.deterministic) {
        // Identical on every run; replicate rather than recompute.
        for (int k = 1; k < runs; ++k) {
          ms.runs.push_back(ms.runs.front());
          if (!daily.empty()) daily.push_back(daily.front());
          for (auto& [level, v] : ledgers) v.push_back(v.front());
          unlimited.push_back(unlimited.front());
        }
        break;
      }
    }
    aggregate(ms);
    if (!daily.empty()) {
      ms.daily_crps = Vector::Zero(daily.front().size());
      for (const auto& d : daily) ms.daily_crps += d;
      ms.daily_crps /= static_cast<double>(daily.size());
    }
    for (const auto& [level, v] : ledgers) ms.trading[level] = summarize(v);
    ms.unlimited = summarize(unlimited);
    summary.models.push_back(std::move(ms));
  }

  std::vector<std::string> names;
  std::vector<Vector> losses;
  for (const auto& m : summary.models) {
    if (m.probabilistic) {
      names.push_back(m.model);
      losses.push_back(m.daily_crps);
    }
  }
  summary.dm = metrics::dm_matrix(names, losses);
  summary.lambda = ex.lear_lambda();
  if (write) write_reports(summary, dir);
  return summary;
}

void write_reports(const RunSummary& s, const std::string& dir) {
  auto num = [](double v) { return csv::format_number(v); };
  {
    auto out = io::open_output(dir + "/table1.csv");
    out << "model,mae,mae_std,rmse,rmse_std,crps,crps_std,maace,maace_std\n";
    for (const auto& m : s.models) {
      out << m.model << ',' << num(m.mean.mae) << ',' << num(m.stddev.mae) << ',' << num(m.mean.rmse)
          << ',' << num(m.stddev.rmse);
      if (m.probabilistic) {
        out << ',' << num(m.mean.crps) << ',' << num(m.stddev.crps) << ',' << num(m.mean.maace)
            << ',' << num(m.stddev.maace) << '\n';
      } else {
        out << ",,,,\n";
      }
    }
  }
  {
    auto out = io::open_output(dir + "/coverage.csv");
    out << "model,level,picp,picp_std,mpiw,mpiw_std\n";
    for (const auto& m : s.models) {
      if (!m.probabilistic) continue;
      for (const auto& [level, v] : m.mean.picp) {
        out << m.model << ',' << level << ',' << num(v) << ',' << num(m.stddev.picp.at(level)) << ','
            << num(m.mean.mpiw.at(level)) << ',' << num(m.stddev.mpiw.at(level)) << '\n';
      }
    }
  }
  {
    auto out = io::open_output(dir + "/dm_statistic.csv");
    metrics::write_dm_matrix(s.dm, false, out);
    auto p = io::open_output(dir + "/dm_pvalue.csv");
    metrics::write_dm_matrix(s.dm, true, p);
  }
  {
    auto out = io::open_output(dir + "/trading.csv");
    out << "strategy,model,level,total_profit,total_profit_std,per_transaction_profit,trades,"
           "profitable_limit_days\n";
    auto row = [&](const std::string& strategy, const std::string& model, const std::string& level,
                   const TradingSummary& t) {
      out << strategy << ',' << model << ',' << level << ',' << num(t.total_profit) << ','
          << num(t.total_profit_std) << ',' << num(t.per_transaction_profit) << ',' << num(t.trades)
          << ',' << num(t.profitable_limit_days) << '\n';
    };
    out << "perfect_foresight,,," << num(s.perfect_foresight) << ",0,,,\n";
    row("fixed_hours", "", "", s.fixed_hours);
    for (const auto& m : s.models) {
      row("unlimited", m.model, "", m.unlimited);
      for (const auto& [level, t] : m.trading) row("quantile", m.model, std::to_string(level), t);
    }
  }
}

}  // namespace probcast::pipeline
