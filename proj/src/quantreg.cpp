#include "probcast/quantreg.hpp"

#include "probcast/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace probcast::quantreg {
namespace {

double check_loss(double r, double tau) { return r >= 0.0 ? tau * r : (tau - 1.0) * r; }

double objective_of(const Matrix& design, const Eigen::Ref<const Vector>& y, const Vector& b,
                    double tau) {
  const Vector r = y - design * b;
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += check_loss(r(i), tau);
  return s;
}

Vector irls(const Matrix& design, const Eigen::Ref<const Vector>& y, double tau, double scale,
            const QuantileFitOptions& opt) {
  const Eigen::Index k = design.cols();
  Vector b = design.colPivHouseholderQr().solve(y);
  const Vector ones_term = (2.0 * tau - 1.0) * design.colwise().sum().transpose();
  for (double eps = opt.smoothing_start; eps >= opt.smoothing_end * 0.999; eps *= 0.1) {
    const double floor = eps * scale;
    for (int it = 0; it < opt.irls_iterations; ++it) {
      const Vector r = y - design * b;
      const Vector w = r.cwiseAbs().cwiseMax(floor).cwiseInverse();
      Matrix lhs = design.transpose() * w.asDiagonal() * design;
      lhs.diagonal().array() += 1e-14 * lhs.diagonal().maxCoeff();
      const Vector rhs = design.transpose() * w.cwiseProduct(y) + ones_term;
      const Vector next = lhs.ldlt().solve(rhs);
      if (!next.allFinite()) break;
      const double change = (next - b).cwiseAbs().maxCoeff();
      b = next;
      if (change <= 1e-12 * (1.0 + b.cwiseAbs().maxCoeff())) break;
    }
  }
  (void)k;
  return b;
}

// Basis of k observations with the smallest residuals and a nonsingular
// design block.
std::vector<Eigen::Index> initial_basis(const Matrix& design, const Vector& r) {
  const Eigen::Index n = design.rows(), k = design.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(r(a)) < std::abs(r(b)); });
  std::vector<Eigen::Index> basis;
  Matrix rows(0, k);
  for (Eigen::Index i : order) {
    Matrix trial(rows.rows() + 1, k);
    trial << rows, design.row(i);
    Eigen::FullPivLU<Matrix> lu(trial);
    lu.setThreshold(1e-10);
    if (lu.rank() == trial.rows()) {
      rows = std::move(trial);
      basis.push_back(i);
      if (static_cast<Eigen::Index>(basis.size()) == k) break;
    }
  }
  return basis;
}

// Simplex-style descent over basic solutions of the check-loss LP.
Vector vertex_descent(const Matrix& design, const Eigen::Ref<const Vector>& y, double tau,
                      const Vector& start, int max_steps) {
  const Eigen::Index n = design.rows(), k = design.cols();
  std::vector<Eigen::Index> basis = initial_basis(design, y - design * start);
  if (static_cast<Eigen::Index>(basis.size()) < k) return start;

  auto solve_basis = [&](const std::vector<Eigen::Index>& B, Matrix& inverse) {
    Matrix block(k, k);
    Vector rhs(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      block.row(j) = design.row(B[static_cast<std::size_t>(j)]);
      rhs(j) = y(B[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Matrix> lu(block);
    inverse = lu.inverse();
    return Vector(lu.solve(rhs));
  };

  Matrix inverse;
  Vector b = solve_basis(basis, inverse);
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i : basis) in_basis[static_cast<std::size_t>(i)] = 1;

  struct Breakpoint {
    double t;
    double slope_gain;
    Eigen::Index obs;
  };
  std::vector<Breakpoint> breaks;
  breaks.reserve(static_cast<std::size_t>(n));

  for (int step = 0; step < max_steps; ++step) {
    const Vector r = y - design * b;
    const double tiny = 1e-12 * (1.0 + r.cwiseAbs().maxCoeff());

    // Most negative directional derivative over the 2k edges.
    double best_slope = -1e-12;
    Eigen::Index best_j = -1;
    Vector best_dir;
    Vector best_rate;
    for (Eigen::Index j = 0; j < k; ++j) {
      for (double sign : {1.0, -1.0}) {
        const Vector dir = -sign * inverse.col(j);
        const Vector rate = -(design * dir);  // d r_i / dt
        double slope = sign > 0.0 ? tau : 1.0 - tau;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (in_basis[static_cast<std::size_t>(i)]) continue;
          const bool positive = r(i) > tiny || (std::abs(r(i)) <= tiny && rate(i) > 0.0);
          slope += rate(i) * (positive ? tau : tau - 1.0);
        }
        if (slope < best_slope) {
          best_slope = slope;
          best_j = j;
          best_dir = dir;
          best_rate = rate;
        }
      }
    }
    if (best_j < 0) break;

    // Walk the ray to the breakpoint where the slope turns non-negative.
    breaks.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || best_rate(i) == 0.0) continue;
      const double t = -r(i) / best_rate(i);
      if (t > -tiny / std::abs(best_rate(i))) {
        breaks.push_back({std::max(t, 0.0), std::abs(best_rate(i)), i});
      }
    }
    if (breaks.empty()) break;  // unbounded direction; cannot occur for tau in (0, 1)
    std::sort(breaks.begin(), breaks.end(),
              [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; });
    double slope = best_slope;
    Eigen::Index entering = breaks.back().obs;
    for (const auto& bp : breaks) {
      slope += bp.slope_gain;
      if (slope >= 0.0) {
        entering = bp.obs;
        break;
      }
    }
    const Eigen::Index leaving = basis[static_cast<std::size_t>(best_j)];
    std::vector<Eigen::Index> next = basis;
    next[static_cast<std::size_t>(best_j)] = entering;
    Matrix next_inverse;
    const Vector candidate = solve_basis(next, next_inverse);
    if (!candidate.allFinite() ||
        objective_of(design, y, candidate, tau) > objective_of(design, y, b, tau) + 1e-13) {
      break;
    }
    in_basis[static_cast<std::size_t>(leaving)] = 0;
    in_basis[static_cast<std::size_t>(entering)] = 1;
    basis = std::move(next);
    inverse = std::move(next_inverse);
    b = candidate;
  }
  return b;
}

}  // namespace

double pinball_objective(double intercept, const Eigen::Ref<const Vector>& weights,
                         const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                         double tau) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    s += check_loss(y(i) - intercept - x.row(i).dot(weights), tau);
  }
  return s;
}

QraModel fit_quantile(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                      double percentile, const QuantileFitOptions& options) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (n < 5) throw DataError("quantile regression needs at least 5 observations");
  if (y.size() != n) throw DataError("quantile regression: X and y row counts differ");
  const double tau = percentile / 100.0;
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("percentile must lie in (0, 100)");
  if (!x.allFinite() || !y.allFinite()) throw NumericalError("quantile regression: non-finite input");

  Matrix design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    throw DataError("quantile regression: degenerate design (constant or collinear columns)");
  }

  QraModel model;
  model.percentile = percentile;
  const double spread = (y.array() - y.mean()).abs().mean();
  Vector b;
  if (spread == 0.0) {
    b = Vector::Zero(p + 1);
    b(0) = y(0);
  } else {
    b = irls(design, y, tau, spread, options);
    const Vector polished = vertex_descent(design, y, tau, b, options.max_vertex_steps);
    if (objective_of(design, y, polished, tau) <= objective_of(design, y, b, tau)) b = polished;
  }
  model.intercept = b(0);
  model.weights = b.tail(p);
  model.objective = objective_of(design, y, b, tau);
  return model;
}

QraModelSet fit_qra(const std::vector<linear::LearEnsembleForecast>& member_forecasts,
                    const Matrix& actuals, const QuantileFitOptions& options) {
  const auto n = static_cast<Eigen::Index>(member_forecasts.size());
  if (actuals.rows() != n || actuals.cols() != kHours) {
    throw DataError("fit_qra: actuals must be (days x 24) aligned with member forecasts");
  }
  if (n == 0) throw DataError("fit_qra: no calibration days");
  const Eigen::Index m = member_forecasts.front().members.cols();
  QraModelSet set(kHours, std::vector<QraModel>(kPercentiles));
  for (int h = 0; h < kHours; ++h) {
    Matrix x(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = member_forecasts[static_cast<std::size_t>(i)].members.row(h);
    }
    const Vector y = actuals.col(h);
    for (int q = 1; q <= kPercentiles; ++q) {
      QraModel model = fit_quantile(x, y, q, options);
      model.hour = h;
      set[h][q - 1] = std::move(model);
    }
  }
  return set;
}

dist::QuantileForecast qra_forecast(const QraModelSet& models,
                                    const linear::LearEnsembleForecast& mean_forecasts) {
  if (models.size() != kHours) throw DataError("qra_forecast: model set must cover 24 hours");
  dist::QuantileForecast qf;
  qf.day = mean_forecasts.day;
  for (int h = 0; h < kHours; ++h) {
    if (models[h].size() != kPercentiles) {
      throw DataError("qra_forecast: missing percentile model for hour " + std::to_string(h));
    }
    const Vector x = mean_forecasts.members.row(h).transpose();
    for (int q = 0; q < kPercentiles; ++q) {
      const QraModel& model = models[h][q];
      if (model.weights.size() != x.size()) {
        throw DataError("qra_forecast: missing percentile model for hour " + std::to_string(h));
      }
      qf.values(h, q) = model.predict(x);
    }
  }
  qf.sort_hours();
  return qf;
}

void write_qra_models(const QraModelSet& models, std::ostream& out) {
  std::size_t m = 0;
  if (!models.empty() && !models.front().empty()) m = models.front().front().weights.size();
  out << "hour,q,intercept";
  for (std::size_t j = 1; j <= m; ++j) out << ",w" << j;
  out << '\n';
  for (std::size_t h = 0; h < models.size(); ++h) {
    for (const auto& model : models[h]) {
      out << h << ',' << csv::format_number(model.percentile) << ','
          << csv::format_number(model.intercept);
      for (Eigen::Index j = 0; j < model.weights.size(); ++j) {
        out << ',' << csv::format_number(model.weights(j));
      }
      out << '\n';
    }
  }
}

QraModelSet read_qra_models(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::Table::read(in, source_name);
  if (t.header().size() < 4 || t.header()[0] != "hour" || t.header()[1] != "q") {
    throw DataError(source_name + ": not a QRA model file (hour, q, intercept, w1..)");
  }
  const std::size_t m = t.header().size() - 3;
  QraModelSet set(kHours, std::vector<QraModel>(kPercentiles));
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    const auto& c = t.rows()[r];
    const std::string where = source_name + ":" + std::to_string(t.line_of(r));
    const int h = static_cast<int>(csv::require_number(c[0], where));
    const int q = static_cast<int>(csv::require_number(c[1], where));
    if (h < 0 || h >= kHours || q < 1 || q > kPercentiles) {
      throw DataError(where + ": hour or percentile out of range");
    }
    QraModel& model = set[h][q - 1];
    model.hour = h;
    model.percentile = q;
    model.intercept = csv::require_number(c[2], where);
    model.weights.resize(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      model.weights(static_cast<Eigen::Index>(j)) = csv::require_number(c[3 + j], where);
    }
  }
  return set;
}

}  // namespace probcast::quantreg
