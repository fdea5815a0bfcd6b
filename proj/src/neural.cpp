#include "probcast/neural.hpp"

#include "probcast/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

namespace probcast::neural {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

struct Cache {
  std::vector<Matrix> inputs;  // activation entering each layer
  std::vector<Matrix> pre;     // hidden pre-activations
  std::vector<Matrix> masks;   // scaled dropout masks (empty: none)
  Matrix raw_logvar;           // before clamping
  GaussianBatch out;
};

Cache run(const MlpParams& p, const Eigen::Ref<const Matrix>& x, const DropoutSpec& dropout) {
  if (!x.allFinite()) throw NumericalError("forward: non-finite input");
  if (p.weights.empty() || x.rows() != p.weights.front().cols()) {
    throw DataError("forward: input size does not match the first layer");
  }
  const std::size_t layers = p.weights.size();
  const bool drop = dropout.rate > 0.0;
  std::mt19937_64 rng(dropout.seed);
  std::bernoulli_distribution keep(1.0 - dropout.rate);
  const double scale = drop ? 1.0 / (1.0 - dropout.rate) : 1.0;

  Cache c;
  c.inputs.push_back(x);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Matrix z = (p.weights[l] * c.inputs.back()).colwise() + p.biases[l];
    Matrix a = z.cwiseMax(0.0);
    if (drop) {
      Matrix mask(a.rows(), a.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(rng) ? scale : 0.0;
      }
      a.array() *= mask.array();
      c.masks.push_back(std::move(mask));
    }
    c.pre.push_back(std::move(z));
    c.inputs.push_back(std::move(a));
  }
  const Matrix o = (p.weights.back() * c.inputs.back()).colwise() + p.biases.back();
  if (o.rows() != 2 * kHours) throw DataError("forward: output layer must have 48 units");
  c.out.mean = o.topRows(kHours);
  c.raw_logvar = o.bottomRows(kHours);
  c.out.logvar = c.raw_logvar.cwiseMax(-kLogVarClamp).cwiseMin(kLogVarClamp);
  return c;
}

// Accumulates parameter gradients given d loss / d (mean, clamped logvar).
void backward(const MlpParams& p, const Cache& c, const Matrix& g_mean, const Matrix& g_logvar,
              MlpParams& grad) {
  const std::size_t layers = p.weights.size();
  Matrix g(2 * kHours, g_mean.cols());
  g.topRows(kHours) = g_mean;
  g.bottomRows(kHours) =
      (c.raw_logvar.array().abs() <= kLogVarClamp).select(g_logvar, 0.0);
  for (std::size_t l = layers; l-- > 0;) {
    grad.weights[l].noalias() += g * c.inputs[l].transpose();
    grad.biases[l] += g.rowwise().sum();
    if (l == 0) break;
    Matrix ga = p.weights[l].transpose() * g;
    if (!c.masks.empty()) ga.array() *= c.masks[l - 1].array();
    g = (c.pre[l - 1].array() > 0.0).select(ga, 0.0);
  }
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z;
  z.seed = p.seed;
  for (const auto& w : p.weights) z.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : p.biases) z.biases.push_back(Vector::Zero(b.size()));
  return z;
}

}  // namespace

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> s;
  if (weights.empty()) return s;
  s.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
  return s;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

double MlpParams::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    s += weights[l].squaredNorm() + biases[l].squaredNorm();
  }
  return s;
}

bool MlpParams::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Vector MlpParams::flatten() const {
  Vector flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(k, weights[l].size()) = weights[l].reshaped();
    k += weights[l].size();
    flat.segment(k, biases[l].size()) = biases[l];
    k += biases[l].size();
  }
  return flat;
}

void MlpParams::assign(const Vector& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw DataError("parameter vector length does not match the network");
  }
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(k, weights[l].size());
    k += weights[l].size();
    biases[l] = flat.segment(k, biases[l].size());
    k += biases[l].size();
  }
}

MlpParams init_mlp(const std::vector<int>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ConfigError("network needs at least an input and an output layer");
  MlpParams p;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l], fan_out = sizes[l + 1];
    const bool output = l + 2 == sizes.size();
    const double sd = output ? std::sqrt(2.0 / (fan_in + fan_out)) : std::sqrt(2.0 / fan_in);
    Matrix w(fan_out, fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = sd * normal(rng);
    }
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(fan_out));
  }
  return p;
}

MlpParams init_mlp(int hidden_units, std::uint64_t seed) {
  if (hidden_units < 1) throw ConfigError("hidden_units must be positive");
  return init_mlp({kNumFeatures, hidden_units, hidden_units, 2 * kHours}, seed);
}

GaussianBatch forward(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                      const std::optional<DropoutSpec>& dropout) {
  return run(params, x, dropout.value_or(DropoutSpec{})).out;
}

GaussianBatch forward(const MlpParams& params, const Eigen::Ref<const Vector>& x,
                      const std::optional<DropoutSpec>& dropout) {
  const Matrix col = x;
  return forward(params, Eigen::Ref<const Matrix>(col), dropout);
}

double nll_gaussian(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& logvar,
                    const Eigen::Ref<const Vector>& y) {
  const auto r2 = (y - mean).array().square();
  return (0.5 * logvar.array() + 0.5 * r2 * (-logvar.array()).exp() + kHalfLog2Pi).sum();
}

double gm_nll(const Eigen::Ref<const Matrix>& mean, const Eigen::Ref<const Matrix>& logvar,
              const Eigen::Ref<const Vector>& y) {
  const Eigen::Index n = mean.cols();
  if (n < 1 || logvar.cols() != n || mean.rows() != y.size() || logvar.rows() != y.size()) {
    throw DataError("gm_nll: component arrays misaligned");
  }
  const double log_w = -std::log(static_cast<double>(n));
  double loss = 0.0;
  Vector terms(n);
  for (Eigen::Index h = 0; h < y.size(); ++h) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = y(h) - mean(h, j);
      terms(j) = log_w - kHalfLog2Pi - 0.5 * logvar(h, j) - 0.5 * r * r * std::exp(-logvar(h, j));
    }
    const double m = terms.maxCoeff();
    loss -= m + std::log((terms.array() - m).exp().sum());
  }
  return loss;
}

LossGradient loss_and_gradient(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                               const Eigen::Ref<const Matrix>& y, LossKind kind,
                               const DropoutSpec& dropout, int passes) {
  const Eigen::Index b = x.cols();
  if (y.cols() != b || y.rows() != kHours) throw DataError("loss: targets misaligned with inputs");
  const double norm = 1.0 / (static_cast<double>(b) * kHours);
  LossGradient out{0.0, zeros_like(params)};

  if (kind == LossKind::kGaussian) {
    const Cache c = run(params, x, dropout);
    const Matrix r = y - c.out.mean;
    const Matrix inv_var = (-c.out.logvar.array()).exp();
    const Matrix r2iv = r.array().square() * inv_var.array();
    out.loss = norm * (0.5 * c.out.logvar.array() + 0.5 * r2iv.array() + kHalfLog2Pi).sum();
    const Matrix g_mean = -norm * (r.array() * inv_var.array());
    const Matrix g_logvar = norm * (0.5 - 0.5 * r2iv.array());
    backward(params, c, g_mean, g_logvar, out.gradient);
    return out;
  }

  if (passes < 1) throw ConfigError("mixture loss needs at least one pass");
  std::vector<Cache> caches;
  caches.reserve(static_cast<std::size_t>(passes));
  for (int k = 0; k < passes; ++k) {
    caches.push_back(run(params, x, {dropout.rate, dropout.seed + static_cast<std::uint64_t>(k)}));
  }
  const double log_w = -std::log(static_cast<double>(passes));
  std::vector<Matrix> g_mean(static_cast<std::size_t>(passes), Matrix(kHours, b));
  std::vector<Matrix> g_logvar(static_cast<std::size_t>(passes), Matrix(kHours, b));
  Vector terms(passes), r(passes), r2iv(passes);
  for (Eigen::Index s = 0; s < b; ++s) {
    for (Eigen::Index h = 0; h < kHours; ++h) {
      for (int k = 0; k < passes; ++k) {
        const auto& o = caches[static_cast<std::size_t>(k)].out;
        r(k) = y(h, s) - o.mean(h, s);
        r2iv(k) = r(k) * r(k) * std::exp(-o.logvar(h, s));
        terms(k) = log_w - kHalfLog2Pi - 0.5 * o.logvar(h, s) - 0.5 * r2iv(k);
      }
      const double m = terms.maxCoeff();
      const Vector w = (terms.array() - m).exp();
      const double total = w.sum();
      out.loss -= norm * (m + std::log(total));
      for (int k = 0; k < passes; ++k) {
        const double gamma = w(k) / total;
        const auto& o = caches[static_cast<std::size_t>(k)].out;
        g_mean[static_cast<std::size_t>(k)](h, s) = -norm * gamma * r(k) * std::exp(-o.logvar(h, s));
        g_logvar[static_cast<std::size_t>(k)](h, s) = norm * gamma * (0.5 - 0.5 * r2iv(k));
      }
    }
  }
  for (int k = 0; k < passes; ++k) {
    const auto i = static_cast<std::size_t>(k);
    backward(params, caches[i], g_mean[i], g_logvar[i], out.gradient);
  }
  return out;
}

void TrainConfig::validate() const {
  if (hidden_units < 1) throw ConfigError("hidden_units must be positive");
  if (!(learning_rate >= 1e-5 && learning_rate <= 1e-1)) {
    throw ConfigError("learning_rate must lie in [1e-5, 1e-1]");
  }
  if (!(l2 >= 1e-5 && l2 <= 1e-1)) throw ConfigError("l2 must lie in [1e-5, 1e-1]");
  if (dropout_rate != 0.0 && !(dropout_rate >= 0.01 && dropout_rate <= 0.9)) {
    throw ConfigError("dropout_rate must be 0 or lie in [0.01, 0.9]");
  }
  if (batch_size < 1 || max_epochs < 1 || patience < 1 || validation_passes < 1) {
    throw ConfigError("batch_size, max_epochs, patience and validation_passes must be positive");
  }
}

TrainConfig TrainConfig::paper_profile() { return TrainConfig{}; }

TrainConfig TrainConfig::desk_profile() {
  TrainConfig c;
  c.hidden_units = 64;
  c.max_epochs = 200;
  c.patience = 30;
  return c;
}

bool EarlyStopping::observe(int epoch, double loss, const MlpParams& params) {
  if (best_epoch_ < 0 || loss < best_loss_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
    best_ = params;
    since_best_ = 0;
    return false;
  }
  return ++since_best_ >= patience_;
}

double validation_loss(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Matrix>& y, const TrainConfig& config) {
  const Matrix xt = x.transpose(), yt = y.transpose();
  if (config.dropout_rate > 0.0) {
    const DropoutSpec spec{config.dropout_rate, config.seed ^ 0x9e3779b97f4a7c15ULL};
    return loss_and_gradient(params, xt, yt, LossKind::kMixture, spec, config.validation_passes)
        .loss;
  }
  const GaussianBatch out = forward(params, Eigen::Ref<const Matrix>(xt));
  double s = 0.0;
  for (Eigen::Index j = 0; j < xt.cols(); ++j) {
    s += nll_gaussian(out.mean.col(j), out.logvar.col(j), yt.col(j));
  }
  return s / (static_cast<double>(xt.cols()) * kHours);
}

TrainResult train(const Eigen::Ref<const Matrix>& x_train, const Eigen::Ref<const Matrix>& y_train,
                  const Eigen::Ref<const Matrix>& x_val, const Eigen::Ref<const Matrix>& y_val,
                  const TrainConfig& config) {
  config.validate();
  if (x_train.rows() == 0 || x_val.rows() == 0) {
    throw DataError("training needs non-empty train and validation sets");
  }
  if (x_train.rows() != y_train.rows() || x_val.rows() != y_val.rows() ||
      y_train.cols() != kHours || y_val.cols() != kHours || x_train.cols() != x_val.cols()) {
    throw DataError("training inputs and targets are misaligned");
  }
  const Matrix xt = x_train.transpose(), yt = y_train.transpose();
  const Eigen::Index n = xt.cols();

  MlpParams params =
      init_mlp({static_cast<int>(xt.rows()), config.hidden_units, config.hidden_units, 2 * kHours},
               config.seed);
  std::mt19937_64 rng(config.seed + 0x5bd1e995ULL);
  MlpParams m = zeros_like(params), v = zeros_like(params);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  EarlyStopping stopper(config.patience);
  TrainResult result;
  Matrix xb, yb;

  auto adam = [&](auto& p, auto& mm, auto& vv, const auto& g, double lr_t) {
    mm = b1 * mm + (1.0 - b1) * g;
    vv = b2 * vv + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr_t * mm.array() / (vv.array().sqrt() + eps);
  };

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
      xb.resize(xt.rows(), len);
      yb.resize(kHours, len);
      for (Eigen::Index j = 0; j < len; ++j) {
        xb.col(j) = xt.col(order[static_cast<std::size_t>(start + j)]);
        yb.col(j) = yt.col(order[static_cast<std::size_t>(start + j)]);
      }
      const DropoutSpec spec{config.dropout_rate, rng()};
      LossGradient lg = loss_and_gradient(params, xb, yb, LossKind::kGaussian, spec);
      ++step;
      const double lr_t = config.learning_rate * std::sqrt(1.0 - std::pow(b2, step)) /
                          (1.0 - std::pow(b1, step));
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        lg.gradient.weights[l] += 2.0 * config.l2 * params.weights[l];
        adam(params.weights[l], m.weights[l], v.weights[l], lg.gradient.weights[l], lr_t);
        adam(params.biases[l], m.biases[l], v.biases[l], lg.gradient.biases[l], lr_t);
      }
    }
    const double val = validation_loss(params, x_val, y_val, config);
    result.validation_history.push_back(val);
    result.epochs_run = epoch + 1;
    if (!std::isfinite(val) || !params.all_finite()) {
      throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                           " (validation loss not finite)");
    }
    if (stopper.observe(epoch, val, params)) break;
  }
  result.params = stopper.best_params();
  result.best_epoch = stopper.best_epoch();
  result.best_validation_loss = stopper.best_loss();
  return result;
}

std::vector<dist::MixtureDistribution> ensemble_predict(const std::vector<MlpParams>& members,
                                                        const Eigen::Ref<const Vector>& x) {
  if (members.empty()) throw DataError("ensemble_predict: no members");
  const auto n = static_cast<Eigen::Index>(members.size());
  Matrix mu(kHours, n), sd(kHours, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const GaussianBatch out = forward(members[static_cast<std::size_t>(i)], x);
    mu.col(i) = out.mean.col(0);
    sd.col(i) = (0.5 * out.logvar.col(0).array()).exp();
  }
  std::vector<dist::MixtureDistribution> mix;
  for (int h = 0; h < kHours; ++h) {
    mix.push_back(dist::MixtureDistribution::equal_weights(mu.row(h).transpose(), sd.row(h).transpose()));
  }
  return mix;
}

std::vector<dist::MixtureDistribution> mc_dropout_predict(const MlpParams& params,
                                                          const Eigen::Ref<const Vector>& x,
                                                          int passes, double rate,
                                                          std::uint64_t seed) {
  if (passes < 1) throw ConfigError("mc_dropout_predict: passes must be >= 1");
  if (!(rate > 0.0 && rate < 1.0)) throw ConfigError("mc_dropout_predict: rate must lie in (0, 1)");
  Matrix mu(kHours, passes), sd(kHours, passes);
  for (int k = 0; k < passes; ++k) {
    const GaussianBatch out =
        forward(params, x, DropoutSpec{rate, seed + static_cast<std::uint64_t>(k)});
    mu.col(k) = out.mean.col(0);
    sd.col(k) = (0.5 * out.logvar.col(0).array()).exp();
  }
  std::vector<dist::MixtureDistribution> mix;
  for (int h = 0; h < kHours; ++h) {
    mix.push_back(dist::MixtureDistribution::equal_weights(mu.row(h).transpose(), sd.row(h).transpose()));
  }
  return mix;
}

HpoResult random_search(const Eigen::Ref<const Matrix>& x_train,
                        const Eigen::Ref<const Matrix>& y_train,
                        const Eigen::Ref<const Matrix>& x_val, const Eigen::Ref<const Matrix>& y_val,
                        const TrainConfig& base, bool with_dropout, int trials, std::uint64_t seed,
                        int runs, const HpoSpace& space) {
  if (trials < 1 || runs < 1) throw ConfigError("hpo: trials and runs must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
  };
  HpoResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    TrainConfig cfg = base;
    cfg.learning_rate = log_uniform(space.lr_low, space.lr_high);
    cfg.l2 = log_uniform(space.l2_low, space.l2_high);
    cfg.dropout_rate = with_dropout ? space.dropout_low + unit(rng) * (space.dropout_high - space.dropout_low)
                                    : 0.0;
    double total = 0.0;
    for (int r = 0; r < runs; ++r) {
      TrainConfig run_cfg = cfg;
      run_cfg.seed = base.seed + 1000ULL * static_cast<std::uint64_t>(t) + static_cast<std::uint64_t>(r);
      try {
        total += train(x_train, y_train, x_val, y_val, run_cfg).best_validation_loss;
      } catch (const NumericalError&) {
        total = std::numeric_limits<double>::infinity();
      }
    }
    const double mean = total / runs;
    result.trials.push_back({cfg, mean});
    if (mean < best) {
      best = mean;
      result.best = cfg;
    }
  }
  if (!std::isfinite(best)) throw NumericalError("hpo: every trial diverged");
  return result;
}

void write_params(const MlpParams& params, std::ostream& out) {
  out << "layers";
  for (int s : params.layer_sizes()) out << ',' << s;
  out << "\nseed," << params.seed << '\n';
  auto dump = [&](const std::string& name, const Matrix& m) {
    out << name << ',' << m.rows() << ',' << m.cols();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << csv::format_number(m(i, j));
    }
    out << '\n';
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    dump("W" + std::to_string(l + 1), params.weights[l]);
    dump("b" + std::to_string(l + 1), params.biases[l]);
  }
}

MlpParams read_params(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return csv::split_line(line);
    }
    throw DataError(source_name + ": truncated parameter file");
  };
  auto where = [&] { return source_name + ":" + std::to_string(line_no); };

  const auto header = next();
  if (header.empty() || header[0] != "layers" || header.size() < 3) {
    throw DataError(where() + ": expected a 'layers' header");
  }
  std::vector<int> sizes;
  for (std::size_t i = 1; i < header.size(); ++i) {
    sizes.push_back(static_cast<int>(csv::require_number(header[i], where())));
  }
  const auto seed_line = next();
  if (seed_line.size() != 2 || seed_line[0] != "seed") throw DataError(where() + ": expected 'seed'");
  MlpParams p;
  p.seed = std::stoull(seed_line[1]);
  auto read_tensor = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    const auto f = next();
    if (f.size() < 3 || f[0] != name) throw DataError(where() + ": expected tensor " + name);
    if (csv::require_number(f[1], where()) != rows || csv::require_number(f[2], where()) != cols ||
        static_cast<Eigen::Index>(f.size()) != 3 + rows * cols) {
      throw DataError(where() + ": tensor " + name + " has the wrong shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = csv::require_number(f[static_cast<std::size_t>(3 + i * cols + j)], where());
      }
    }
    return m;
  };
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    p.weights.push_back(read_tensor("W" + std::to_string(l + 1), sizes[l + 1], sizes[l]));
    p.biases.push_back(read_tensor("b" + std::to_string(l + 1), sizes[l + 1], 1).col(0));
  }
  if (!p.all_finite()) throw DataError(source_name + ": non-finite parameter");
  return p;
}

}  // namespace probcast::neural
