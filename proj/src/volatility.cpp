#include "probcast/volatility.hpp"

#include "probcast/csv.hpp"
#include "probcast/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace probcast::volatility {
namespace {

constexpr double kPersistenceCap = 1.0 - 1e-6;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Params {
  double omega, alpha, beta;
};

Params unpack(const Eigen::Vector3d& t) {
  const double s = logistic(t(1)), a = logistic(t(2));
  return {std::exp(t(0)), s * a, s * (1.0 - a)};
}

Eigen::Vector3d pack(double omega, double persistence, double share) {
  return {std::log(omega), logit(persistence), logit(share)};
}

// Mean negative log-likelihood and its gradient in the transformed space.
double objective(const Eigen::Ref<const Vector>& e, double h0, const Eigen::Vector3d& t,
                 Eigen::Vector3d* grad) {
  const Params p = unpack(t);
  const Eigen::Index n = e.size();
  double h = h0, dw = 0.0, da = 0.0, db = 0.0;
  double nll = 0.0, gw = 0.0, ga = 0.0, gb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i > 0) {
      const double e2 = e(i - 1) * e(i - 1);
      dw = 1.0 + p.beta * dw;
      da = e2 + p.beta * da;
      db = h + p.beta * db;
      h = p.omega + p.alpha * e2 + p.beta * h;
    }
    const double e2 = e(i) * e(i);
    nll += 0.5 * (std::log(h) + e2 / h);
    const double dl = 0.5 * (1.0 / h - e2 / (h * h));
    gw += dl * dw;
    ga += dl * da;
    gb += dl * db;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) {
    const double s = logistic(t(1)), a = logistic(t(2));
    const double ds = s * (1.0 - s), dsh = a * (1.0 - a);
    (*grad)(0) = gw * p.omega * inv_n;
    (*grad)(1) = (ga * a + gb * (1.0 - a)) * ds * inv_n;
    (*grad)(2) = (ga - gb) * s * dsh * inv_n;
  }
  return nll * inv_n + 0.5 * std::log(2.0 * std::numbers::pi);
}

struct BfgsResult {
  Eigen::Vector3d t;
  double value;
  bool converged;
};

BfgsResult bfgs(const Eigen::Ref<const Vector>& e, double h0, Eigen::Vector3d t,
                const GarchFitOptions& opt) {
  Eigen::Vector3d g;
  double f = objective(e, h0, t, &g);
  Eigen::Matrix3d hinv = Eigen::Matrix3d::Identity();
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tol) return {t, f, true};
    Eigen::Vector3d dir = -hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Eigen::Vector3d t_new, g_new;
    double f_new = std::numeric_limits<double>::infinity();
    for (int ls = 0; ls < 60; ++ls) {
      t_new = t + step * dir;
      f_new = objective(e, h0, t_new, &g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope)) {
      return {t, f, g.lpNorm<Eigen::Infinity>() < 1e-5};
    }
    const Eigen::Vector3d s = t_new - t, y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() - rho * s * y.transpose();
      hinv = v * hinv * v.transpose() + rho * s * s.transpose();
    }
    const double change = f - f_new;
    t = t_new;
    g = g_new;
    f = f_new;
    if (change >= 0.0 && change < 1e-15 * (1.0 + std::abs(f))) {
      return {t, f, g.lpNorm<Eigen::Infinity>() < 1e-5};
    }
  }
  return {t, f, false};
}

}  // namespace

double garch_log_likelihood(const Eigen::Ref<const Vector>& residuals, double omega, double alpha,
                            double beta, double initial_variance) {
  double h = initial_variance, ll = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    if (i > 0) h = omega + alpha * residuals(i - 1) * residuals(i - 1) + beta * h;
    ll -= 0.5 * (std::log(2.0 * std::numbers::pi) + std::log(h) + residuals(i) * residuals(i) / h);
  }
  return ll;
}

Vector garch_variances(const GarchModel& model, const Eigen::Ref<const Vector>& residuals) {
  Vector h(residuals.size() + 1);
  h(0) = model.initial_variance;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    h(i + 1) = model.omega + model.alpha * residuals(i) * residuals(i) + model.beta * h(i);
  }
  return h;
}

GarchModel fit_garch(const Eigen::Ref<const Vector>& residuals, int hour,
                     const GarchFitOptions& options) {
  const Eigen::Index n = residuals.size();
  if (n < 50) throw DataError("GARCH fit needs at least 50 residuals");
  if (!residuals.allFinite()) throw NumericalError("GARCH fit: non-finite residual");
  const double mean = residuals.mean();
  const double var = (residuals.array() - mean).square().mean();
  if (!(var > 0.0)) throw DataError("GARCH fit: residuals have zero variance");

  // Work in units of the sample standard deviation; omega scales back by var.
  const Vector e = residuals / std::sqrt(var);
  const double h0 = 1.0;

  std::vector<Eigen::Vector3d> starts{pack(0.05, 0.95, 0.05 / 0.95)};
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int r = 0; r < options.restarts; ++r) {
    const double s = 0.5 + 0.49 * u01(rng);
    const double a = 0.02 + 0.6 * u01(rng);
    const double w = (1.0 - s) * std::exp(2.0 * u01(rng) - 1.0);
    starts.push_back(pack(w, s, a));
  }

  BfgsResult best{starts.front(), std::numeric_limits<double>::infinity(), false};
  for (const auto& start : starts) {
    const BfgsResult res = bfgs(e, h0, start, options);
    if (res.value < best.value) best = res;
  }
  if (!std::isfinite(best.value)) throw NumericalError("GARCH fit: likelihood is not finite");

  Params p = unpack(best.t);
  GarchModel model;
  model.hour = hour;
  if (p.alpha + p.beta >= kPersistenceCap) {
    model.boundary = true;
    const double scale = kPersistenceCap / (p.alpha + p.beta);
    p.alpha *= scale;
    p.beta *= scale;
  }
  model.omega = p.omega * var;
  model.alpha = p.alpha;
  model.beta = p.beta;
  model.residual_mean = mean;
  model.initial_variance = var;
  model.log_likelihood = garch_log_likelihood(residuals, model.omega, model.alpha, model.beta, var);
  if (!best.converged && !model.boundary) {
    throw NumericalError("GARCH fit did not converge for hour " + std::to_string(hour));
  }
  return model;
}

Vector forecast_variance(const GarchModel& model, const Eigen::Ref<const Vector>& recent,
                         int steps) {
  if (recent.size() == 0) throw DataError("GARCH forecast needs at least one residual");
  if (steps < 1) throw ConfigError("GARCH forecast needs steps >= 1");
  const Vector h = garch_variances(model, recent);
  Vector out(steps);
  out(0) = h(h.size() - 1);
  for (int k = 1; k < steps; ++k) out(k) = model.omega + model.persistence() * out(k - 1);
  return out;
}

GarchFilter::GarchFilter(const GarchModel& model)
    : model_(model), variance_(model.initial_variance) {}

GarchFilter::GarchFilter(const GarchModel& model, const Eigen::Ref<const Vector>& history)
    : model_(model) {
  const Vector h = garch_variances(model, history);
  variance_ = h(h.size() - 1);
}

void GarchFilter::update(double residual) {
  variance_ = model_.omega + model_.alpha * residual * residual + model_.beta * variance_;
}

Eigen::Matrix<double, 1, kPercentiles> gaussian_quantile_forecast(double mean, double variance) {
  return dist::gaussian_quantile_row(mean, variance);
}

void write_garch_models(const std::vector<GarchModel>& models, std::ostream& out) {
  out << "hour,omega,alpha,beta,initial_variance,residual_mean\n";
  for (const auto& m : models) {
    out << m.hour << ',' << csv::format_number(m.omega) << ',' << csv::format_number(m.alpha)
        << ',' << csv::format_number(m.beta) << ',' << csv::format_number(m.initial_variance)
        << ',' << csv::format_number(m.residual_mean) << '\n';
  }
}

std::vector<GarchModel> read_garch_models(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::Table::read(in, source_name);
  const std::size_t ch = t.require("hour"), cw = t.require("omega"), ca = t.require("alpha"),
                    cb = t.require("beta");
  const auto cv = t.find("initial_variance");
  const auto cm = t.find("residual_mean");
  std::vector<GarchModel> out;
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& c = t.rows()[r];
    const std::string where = source_name + ":" + std::to_string(t.line_of(r));
    GarchModel m;
    m.hour = static_cast<int>(csv::require_number(c[ch], where));
    m.omega = csv::require_number(c[cw], where);
    m.alpha = csv::require_number(c[ca], where);
    m.beta = csv::require_number(c[cb], where);
    if (!(m.omega > 0.0) || m.alpha < 0.0 || m.beta < 0.0 || m.alpha + m.beta >= 1.0) {
      throw DataError(where + ": GARCH parameters violate omega > 0, alpha, beta >= 0, alpha + beta < 1");
    }
    m.initial_variance = cv ? csv::require_number(c[*cv], where) : m.unconditional_variance();
    if (cm) m.residual_mean = csv::require_number(c[*cm], where);
    out.push_back(m);
  }
  return out;
}

}  // namespace probcast::volatility
