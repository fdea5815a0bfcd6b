#pragma once

#include "probcast/common.hpp"
#include "probcast/data.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace probcast::linear {

struct LassoOptions {
  double tol = 1e-6;        // max absolute coefficient change per sweep
  int max_sweeps = 10000;
  bool standardize = true;  // internal per-column scaling, undone on output
  /// When set, receives the objective after every sweep (including the start).
  std::vector<double>* objective_trace = nullptr;
};

struct LassoModel {
  double intercept = 0.0;
  Vector coefficients;  // raw (unscaled) units
  double penalty = 0.0;
  int hour = -1;
  int sweeps = 0;

  double predict(const Eigen::Ref<const Vector>& x) const {
    return intercept + coefficients.dot(x);
  }
  Eigen::Index nonzeros() const { return (coefficients.array() != 0.0).count(); }
};

/// Centered (and optionally scaled) Gram matrix of a design, reusable across
/// responses and penalties. Zero-variance columns are pinned at zero.
class LassoProblem {
 public:
  explicit LassoProblem(const Eigen::Ref<const Matrix>& x, bool standardize = true);

  /// Cyclic coordinate descent on (1/2n)|y - b0 - X b|^2 + lambda |b|_1
  /// (in scaled space when standardizing). `warm_start` holds raw
  /// coefficients from an earlier solve.
  LassoModel solve(const Eigen::Ref<const Vector>& y, double lambda,
                   const LassoOptions& options = {}, const Vector* warm_start = nullptr) const;

  /// Smallest penalty that zeroes every coefficient.
  double lambda_max(const Eigen::Ref<const Vector>& y) const;

  Eigen::Index rows() const { return n_; }
  Eigen::Index cols() const { return gram_.cols(); }

 private:
  Vector correlations(const Eigen::Ref<const Vector>& y, double& y_mean, double& y_var) const;

  Eigen::Index n_ = 0;
  bool standardize_ = true;
  Vector x_mean_;
  Vector x_scale_;  // 0 marks an inactive column
  Matrix x_centered_;
  Matrix gram_;
};

LassoModel fit_lasso(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                     double lambda, const LassoOptions& options = {});

/// Analytic kill threshold: max_j |x~_j' (y - mean y)| / n with x~ the
/// internally scaled columns.
double lambda_max(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                  bool standardize = true);

/// Objective minimized by fit_lasso, evaluated at `model`.
double lasso_objective(const LassoModel& model, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Vector>& y, bool standardize = true);

inline constexpr int kPaperWindows[] = {56, 84, 1092, 1461};

/// Trailing-window fit for one delivery hour using the `window_days` rows
/// dated strictly before `as_of`.
LassoModel fit_lear_hour(const data::FeatureDataset& dataset, int hour, int window_days,
                         Date as_of, double lambda, const LassoOptions& options = {});

struct LearEnsembleForecast {
  Date day;
  std::vector<int> windows;
  Matrix members;  // kHours x windows.size()
  Vector mean;     // kHours
};

LearEnsembleForecast lear_point_forecast(const data::FeatureDataset& dataset, Date day,
                                         double lambda,
                                         std::span<const int> windows = kPaperWindows,
                                         const LassoOptions& options = {});

/// Daily rolling refits over many forecast days. Each (hour, window) model
/// warm-starts from its previous day's solution; the Gram matrix of each
/// window is shared by the 24 hourly fits.
class LearForecaster {
 public:
  LearForecaster(std::vector<int> windows, double lambda, LassoOptions options = {});

  std::vector<LearEnsembleForecast> forecast(const data::FeatureDataset& dataset,
                                             std::span<const Date> days);
  /// Models fitted for the most recent forecast day, indexed [window][hour].
  const std::vector<std::vector<LassoModel>>& last_models() const { return models_; }

 private:
  std::vector<int> windows_;
  double lambda_;
  LassoOptions options_;
  std::vector<std::vector<LassoModel>> models_;
};

struct LambdaSearch {
  double low = 1e-5;
  double high = 1e-1;
  int trials = 200;
  std::uint64_t seed = 0;
  int window = 1461;
};

struct LambdaSearchResult {
  double lambda = 0.0;
  double validation_mae = 0.0;
  std::vector<std::pair<double, double>> trials;  // (lambda, MAE) in sampling order
};

/// Seeded log-uniform random search; the objective is the validation MAE of
/// the single `window` model, refitted every validation day.
LambdaSearchResult tune_lambda(const data::FeatureDataset& dataset, const LambdaSearch& search,
                               const LassoOptions& options = {});

struct LearModelRecord {
  int hour;
  int horizon;
  LassoModel model;
};

void write_lear_models(std::span<const LearModelRecord> models, std::ostream& out);
std::vector<LearModelRecord> read_lear_models(std::istream& in,
                                              const std::string& source_name = "<stream>");

}  // namespace probcast::linear
