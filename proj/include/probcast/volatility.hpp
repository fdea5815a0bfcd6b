#pragma once

#include "probcast/common.hpp"
#include "probcast/distribution.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace probcast::volatility {

/// GARCH(1,1): s2_t = omega + alpha e_{t-1}^2 + beta s2_{t-1}.
struct GarchModel {
  int hour = -1;
  double omega = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double residual_mean = 0.0;     // diagnostic only; the recursion uses raw residuals
  double initial_variance = 0.0;  // s2_0, the sample variance of the fit data
  double log_likelihood = 0.0;
  bool boundary = false;          // alpha + beta hit 1 - 1e-6

  double persistence() const { return alpha + beta; }
  double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

struct GarchFitOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  int max_iterations = 500;
  double gradient_tol = 1e-8;
};

/// Gaussian log-likelihood of `residuals` under (omega, alpha, beta) with
/// s2_0 = initial_variance.
double garch_log_likelihood(const Eigen::Ref<const Vector>& residuals, double omega, double alpha,
                            double beta, double initial_variance);

/// In-sample conditional variances s2_0 .. s2_n (n + 1 values; the last is
/// the one-step-ahead forecast).
Vector garch_variances(const GarchModel& model, const Eigen::Ref<const Vector>& residuals);

/// Maximum likelihood via BFGS on omega = exp(t0), alpha + beta = logistic(t1),
/// alpha share = logistic(t2), with seeded random restarts.
GarchModel fit_garch(const Eigen::Ref<const Vector>& residuals, int hour = -1,
                     const GarchFitOptions& options = {});

/// Variance path for `steps` days after the last residual in `recent`, with
/// the in-sample recursion started from model.initial_variance.
Vector forecast_variance(const GarchModel& model, const Eigen::Ref<const Vector>& recent,
                         int steps = 1);

/// Running recursion state for one hour; update() after each realized residual.
class GarchFilter {
 public:
  GarchFilter() = default;
  explicit GarchFilter(const GarchModel& model);
  GarchFilter(const GarchModel& model, const Eigen::Ref<const Vector>& history);

  /// Variance for the next, not yet realized, residual.
  double next_variance() const { return variance_; }
  void update(double residual);

 private:
  GarchModel model_;
  double variance_ = 0.0;
};

/// mu + sqrt(s2) * Phi^-1(q / 100) for q = 1..99.
Eigen::Matrix<double, 1, kPercentiles> gaussian_quantile_forecast(double mean, double variance);

void write_garch_models(const std::vector<GarchModel>& models, std::ostream& out);
std::vector<GarchModel> read_garch_models(std::istream& in,
                                          const std::string& source_name = "<stream>");

}  // namespace probcast::volatility
