#pragma once

#include "probcast/common.hpp"
#include "probcast/distribution.hpp"
#include "probcast/linear.hpp"

#include <iosfwd>
#include <vector>

namespace probcast::quantreg {

/// Linear quantile model on the horizon mean forecasts of one delivery hour.
struct QraModel {
  int hour = -1;
  double percentile = 50.0;  // (0, 100)
  double intercept = 0.0;
  Vector weights;
  double objective = 0.0;  // pinball sum at the fitted parameters

  double predict(const Eigen::Ref<const Vector>& x) const { return intercept + weights.dot(x); }
};

struct QuantileFitOptions {
  double smoothing_start = 1e-2;  // relative to the spread of y
  double smoothing_end = 1e-8;
  int irls_iterations = 60;       // per smoothing level
  int max_vertex_steps = 10000;
};

/// Check-function loss sum_i rho_tau(y_i - intercept - x_i' w).
double pinball_objective(double intercept, const Eigen::Ref<const Vector>& weights,
                         const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                         double tau);

/// Minimizes the pinball objective. IRLS on a Huberized check function with
/// annealed smoothing gets close to the optimum; exchange steps between
/// basic solutions (k residuals pinned at zero) then land on the exact
/// linear-programming vertex.
QraModel fit_quantile(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                      double percentile, const QuantileFitOptions& options = {});

/// 99 models per hour, indexed [hour][percentile - 1].
using QraModelSet = std::vector<std::vector<QraModel>>;

/// Fits every (hour, percentile) pair on aligned member forecasts and actuals.
QraModelSet fit_qra(const std::vector<linear::LearEnsembleForecast>& member_forecasts,
                    const Matrix& actuals, const QuantileFitOptions& options = {});

dist::QuantileForecast qra_forecast(const QraModelSet& models,
                                    const linear::LearEnsembleForecast& mean_forecasts);

void write_qra_models(const QraModelSet& models, std::ostream& out);
QraModelSet read_qra_models(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace probcast::quantreg
