#include "probcast/linear.hpp"

#include "probcast/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>

namespace probcast::linear {
namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

void require_finite(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y) {
  if (!x.allFinite() || !y.allFinite()) throw NumericalError("lasso: non-finite input");
  if (x.rows() != y.size()) throw DataError("lasso: X and y row counts differ");
  if (x.rows() < 1) throw DataError("lasso: need at least one observation");
}

std::vector<std::size_t> trailing_window(const data::FeatureDataset& dataset, Date as_of,
                                         int window_days) {
  if (window_days < 1) throw ConfigError("window must be positive");
  const auto end = std::lower_bound(dataset.rows.begin(), dataset.rows.end(), as_of,
                                    [](const data::DailyRow& r, Date d) { return r.date < d; });
  const auto available = static_cast<std::size_t>(end - dataset.rows.begin());
  if (available < static_cast<std::size_t>(window_days)) {
    throw DataError("insufficient history for a " + std::to_string(window_days) +
                    "-day window before " + as_of.to_string() + " (" +
                    std::to_string(available) + " rows)");
  }
  std::vector<std::size_t> idx(static_cast<std::size_t>(window_days));
  std::iota(idx.begin(), idx.end(), available - idx.size());
  return idx;
}

}  // namespace

LassoProblem::LassoProblem(const Eigen::Ref<const Matrix>& x, bool standardize)
    : n_(x.rows()), standardize_(standardize) {
  if (!x.allFinite()) throw NumericalError("lasso: non-finite input");
  if (n_ < 1) throw DataError("lasso: need at least one observation");
  x_mean_ = x.colwise().mean().transpose();
  x_centered_ = x.rowwise() - x_mean_.transpose();
  const Vector sd =
      (x_centered_.array().square().colwise().sum() / static_cast<double>(n_)).sqrt().transpose();
  x_scale_ = Vector::Ones(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double tiny = 1e-12 * std::max(1.0, std::abs(x_mean_(j)));
    if (!(sd(j) > tiny)) {
      x_scale_(j) = 0.0;
    } else if (standardize_) {
      x_scale_(j) = sd(j);
    }
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x_scale_(j) > 0.0) x_centered_.col(j) /= x_scale_(j);
    else x_centered_.col(j).setZero();
  }
  gram_ = Matrix(x.cols(), x.cols());
  gram_.setZero();
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(x_centered_.transpose(),
                                                   1.0 / static_cast<double>(n_));
  gram_ = gram_.selfadjointView<Eigen::Lower>();
}

Vector LassoProblem::correlations(const Eigen::Ref<const Vector>& y, double& y_mean,
                                  double& y_var) const {
  if (y.size() != n_) throw DataError("lasso: X and y row counts differ");
  if (!y.allFinite()) throw NumericalError("lasso: non-finite input");
  y_mean = y.mean();
  const Vector yc = y.array() - y_mean;
  y_var = yc.squaredNorm() / static_cast<double>(n_);
  return x_centered_.transpose() * yc / static_cast<double>(n_);
}

double LassoProblem::lambda_max(const Eigen::Ref<const Vector>& y) const {
  double mean = 0.0, var = 0.0;
  return correlations(y, mean, var).cwiseAbs().maxCoeff();
}

LassoModel LassoProblem::solve(const Eigen::Ref<const Vector>& y, double lambda,
                               const LassoOptions& options, const Vector* warm_start) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lasso: penalty must be finite and >= 0");
  }
  double y_mean = 0.0, y_var = 0.0;
  const Vector c = correlations(y, y_mean, y_var);
  const Eigen::Index p = gram_.cols();

  Vector beta = Vector::Zero(p);
  if (warm_start != nullptr && warm_start->size() == p) {
    beta = warm_start->cwiseProduct(x_scale_);
  }
  // grad = c - G beta; coordinate j minimizes with g_j = grad_j + G_jj beta_j.
  Vector grad = c - gram_ * beta;

  auto objective = [&] {
    return 0.5 * y_var - c.dot(beta) + 0.5 * beta.dot(gram_ * beta) +
           lambda * beta.lpNorm<1>();
  };
  if (options.objective_trace) {
    options.objective_trace->clear();
    options.objective_trace->push_back(objective());
  }

  auto update = [&](Eigen::Index j) {
    const double gjj = gram_(j, j);
    if (x_scale_(j) == 0.0 || gjj <= 0.0) return 0.0;
    const double z = grad(j) + gjj * beta(j);
    const double next = soft_threshold(z, lambda) / gjj;
    const double delta = next - beta(j);
    if (delta != 0.0) {
      grad.noalias() -= gram_.col(j) * delta;
      beta(j) = next;
    }
    return std::abs(delta);
  };

  int sweeps = 0;
  double last_delta = 0.0;
  bool full_sweep = true;
  std::vector<Eigen::Index> active;
  while (true) {
    if (sweeps >= options.max_sweeps) {
      throw NumericalError("lasso: no convergence after " + std::to_string(sweeps) +
                           " sweeps (last max change " + csv::format_number(last_delta) + ")");
    }
    double max_delta = 0.0;
    if (full_sweep) {
      for (Eigen::Index j = 0; j < p; ++j) max_delta = std::max(max_delta, update(j));
    } else {
      for (Eigen::Index j : active) max_delta = std::max(max_delta, update(j));
    }
    ++sweeps;
    last_delta = max_delta;
    if (options.objective_trace) options.objective_trace->push_back(objective());

    if (max_delta < options.tol) {
      if (full_sweep) break;
      full_sweep = true;  // confirm on the full coordinate set
    } else {
      full_sweep = false;
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta(j) != 0.0) active.push_back(j);
      }
    }
  }

  LassoModel model;
  model.penalty = lambda;
  model.sweeps = sweeps;
  model.coefficients = Vector::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (x_scale_(j) > 0.0) model.coefficients(j) = beta(j) / x_scale_(j);
  }
  model.intercept = y_mean - model.coefficients.dot(x_mean_);
  return model;
}

LassoModel fit_lasso(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                     double lambda, const LassoOptions& options) {
  require_finite(x, y);
  return LassoProblem(x, options.standardize).solve(y, lambda, options);
}

double lambda_max(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                  bool standardize) {
  require_finite(x, y);
  return LassoProblem(x, standardize).lambda_max(y);
}

double lasso_objective(const LassoModel& model, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Vector>& y, bool standardize) {
  const auto n = static_cast<double>(x.rows());
  const Vector resid = (y - x * model.coefficients).array() - model.intercept;
  double penalty = model.coefficients.lpNorm<1>();
  if (standardize) {
    const Vector mean = x.colwise().mean().transpose();
    const Vector sd =
        ((x.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    penalty = model.coefficients.cwiseAbs().dot(sd);
  }
  return resid.squaredNorm() / (2.0 * n) + model.penalty * penalty;
}

LassoModel fit_lear_hour(const data::FeatureDataset& dataset, int hour, int window_days,
                         Date as_of, double lambda, const LassoOptions& options) {
  if (hour < 0 || hour >= kHours) throw ConfigError("hour out of range");
  const auto idx = trailing_window(dataset, as_of, window_days);
  const Matrix x = dataset.feature_matrix(idx);
  const Vector y = dataset.target_matrix(idx).col(hour);
  LassoModel m = fit_lasso(x, y, lambda, options);
  m.hour = hour;
  return m;
}

LearEnsembleForecast lear_point_forecast(const data::FeatureDataset& dataset, Date day,
                                         double lambda, std::span<const int> windows,
                                         const LassoOptions& options) {
  LearForecaster engine(std::vector<int>(windows.begin(), windows.end()), lambda, options);
  const Date days[] = {day};
  return engine.forecast(dataset, days).front();
}

LearForecaster::LearForecaster(std::vector<int> windows, double lambda, LassoOptions options)
    : windows_(std::move(windows)), lambda_(lambda), options_(options) {
  if (windows_.empty()) throw ConfigError("LEAR needs at least one calibration window");
}

std::vector<LearEnsembleForecast> LearForecaster::forecast(const data::FeatureDataset& dataset,
                                                           std::span<const Date> days) {
  const auto m = static_cast<Eigen::Index>(windows_.size());
  std::vector<LearEnsembleForecast> out;
  out.reserve(days.size());
  if (models_.size() != windows_.size()) models_.assign(windows_.size(), {});

  for (Date day : days) {
    const std::ptrdiff_t row = dataset.find(day);
    if (row < 0) throw DataError("no feature row for forecast day " + day.to_string());
    const Vector& x_day = dataset.rows[static_cast<std::size_t>(row)].features;

    LearEnsembleForecast f{day, windows_, Matrix(kHours, m), Vector(kHours)};
    for (Eigen::Index w = 0; w < m; ++w) {
      const auto idx = trailing_window(dataset, day, windows_[static_cast<std::size_t>(w)]);
      const LassoProblem problem(dataset.feature_matrix(idx), options_.standardize);
      const Matrix y = dataset.target_matrix(idx);
      auto& slot = models_[static_cast<std::size_t>(w)];
      const bool warm = slot.size() == kHours;
      std::vector<LassoModel> fitted(kHours);
      for (int h = 0; h < kHours; ++h) {
        fitted[h] = problem.solve(y.col(h), lambda_, options_,
                                  warm ? &slot[h].coefficients : nullptr);
        fitted[h].hour = h;
        f.members(h, w) = fitted[h].predict(x_day);
      }
      slot = std::move(fitted);
    }
    f.mean = f.members.rowwise().mean();
    out.push_back(std::move(f));
  }
  return out;
}

LambdaSearchResult tune_lambda(const data::FeatureDataset& dataset, const LambdaSearch& search,
                               const LassoOptions& options) {
  if (!(search.low > 0.0) || !(search.high >= search.low) || search.trials < 1) {
    throw ConfigError("tune_lambda: empty search range");
  }
  const auto validation = dataset.indices(data::Split::kValidation);
  if (validation.empty()) throw DataError("tune_lambda: validation split is empty");

  std::mt19937_64 rng(search.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(search.low), log_hi = std::log(search.high);
  std::vector<double> candidates(static_cast<std::size_t>(search.trials));
  for (double& c : candidates) {
    c = search.low == search.high ? search.low : std::exp(log_lo + (log_hi - log_lo) * unit(rng));
  }

  // Solve along a decreasing path so each fit warm-starts from the previous.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a] > candidates[b]; });

  // A candidate whose fit fails to converge on any validation day is dropped
  // (MAE reported as +inf) rather than aborting the search.
  std::vector<double> abs_error(candidates.size(), 0.0);
  std::vector<bool> failed(candidates.size(), false);
  for (std::size_t v : validation) {
    const auto& row = dataset.rows[v];
    const auto idx = trailing_window(dataset, row.date, search.window);
    const LassoProblem problem(dataset.feature_matrix(idx), options.standardize);
    const Matrix y = dataset.target_matrix(idx);
    for (int h = 0; h < kHours; ++h) {
      Vector warm;
      for (std::size_t k : order) {
        if (failed[k]) continue;
        try {
          const LassoModel fit =
              problem.solve(y.col(h), candidates[k], options, warm.size() ? &warm : nullptr);
          abs_error[k] += std::abs(fit.predict(row.features) - row.targets(h));
          warm = fit.coefficients;
        } catch (const NumericalError&) {
          failed[k] = true;
        }
      }
    }
  }

  LambdaSearchResult result;
  const double cells = static_cast<double>(validation.size() * kHours);
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double mae =
        failed[k] ? std::numeric_limits<double>::infinity() : abs_error[k] / cells;
    result.trials.emplace_back(candidates[k], mae);
    if (!failed[k] && (!best || abs_error[k] < abs_error[*best])) best = k;
  }
  if (!best) throw NumericalError("tune_lambda: no candidate penalty converged");
  result.lambda = candidates[*best];
  result.validation_mae = abs_error[*best] / cells;
  return result;
}

void write_lear_models(std::span<const LearModelRecord> models, std::ostream& out) {
  out << "hour,horizon,intercept";
  for (int j = 0; j < kNumFeatures; ++j) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "c%03d", j);
    out << ',' << buf;
  }
  out << ",lambda\n";
  for (const auto& r : models) {
    out << r.hour << ',' << r.horizon << ',' << csv::format_number(r.model.intercept);
    for (Eigen::Index j = 0; j < r.model.coefficients.size(); ++j) {
      out << ',' << csv::format_number(r.model.coefficients(j));
    }
    out << ',' << csv::format_number(r.model.penalty) << '\n';
  }
}

std::vector<LearModelRecord> read_lear_models(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::Table::read(in, source_name);
  if (t.header().size() != static_cast<std::size_t>(kNumFeatures + 4)) {
    throw DataError(source_name + ": not a LEAR model file");
  }
  std::vector<LearModelRecord> out;
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& c = t.rows()[r];
    const std::string where = source_name + ":" + std::to_string(t.line_of(r));
    LearModelRecord rec;
    rec.hour = static_cast<int>(csv::require_number(c[0], where));
    rec.horizon = static_cast<int>(csv::require_number(c[1], where));
    rec.model.hour = rec.hour;
    rec.model.intercept = csv::require_number(c[2], where);
    rec.model.coefficients.resize(kNumFeatures);
    for (int j = 0; j < kNumFeatures; ++j) {
      rec.model.coefficients(j) = csv::require_number(c[3 + j], where);
    }
    rec.model.penalty = csv::require_number(c[3 + kNumFeatures], where);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace probcast::linear
