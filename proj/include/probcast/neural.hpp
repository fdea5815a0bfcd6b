#pragma once

#include "probcast/common.hpp"
#include "probcast/distribution.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace probcast::neural {

inline constexpr double kLogVarClamp = 20.0;

/// Fully connected ReLU network; the last layer is linear with 2 * kHours
/// outputs (means, then log-variances).
struct MlpParams {
  std::vector<Matrix> weights;  // layer l: out x in
  std::vector<Vector> biases;
  std::uint64_t seed = 0;

  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
  double squared_norm() const;  // weights and biases
  bool all_finite() const;
  /// Flat view for finite differences and tests: W1, b1, W2, b2, ...
  Vector flatten() const;
  void assign(const Vector& flat);
};

/// He-normal hidden weights, Glorot-normal output weights, zero biases.
MlpParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);
/// 151 -> hidden -> hidden -> 48.
MlpParams init_mlp(int hidden_units, std::uint64_t seed);

struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

struct GaussianBatch {
  Matrix mean;    // kHours x batch
  Matrix logvar;  // kHours x batch, clamped to [-20, 20]
};

/// Column-per-sample forward pass. Inverted dropout after each hidden layer
/// when a spec with a positive rate is given.
GaussianBatch forward(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                      const std::optional<DropoutSpec>& dropout = std::nullopt);

/// Single sample convenience.
GaussianBatch forward(const MlpParams& params, const Eigen::Ref<const Vector>& x,
                      const std::optional<DropoutSpec>& dropout = std::nullopt);

/// sum_h 0.5 logvar + 0.5 (y - mu)^2 exp(-logvar) + 0.5 log(2 pi).
double nll_gaussian(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& logvar,
                    const Eigen::Ref<const Vector>& y);

/// -sum_h log sum_j (1/N) phi(y_h; mu_hj, sigma_hj) with log-sum-exp
/// stabilization. Columns of `mean` / `logvar` are the N components.
double gm_nll(const Eigen::Ref<const Matrix>& mean, const Eigen::Ref<const Matrix>& logvar,
              const Eigen::Ref<const Vector>& y);

enum class LossKind { kGaussian, kMixture };

struct LossGradient {
  double loss = 0.0;
  MlpParams gradient;
};

/// Mean per-sample loss over the columns of x, each divided by kHours.
/// kGaussian runs one forward pass (with dropout if the rate is positive);
/// kMixture runs `passes` dropout passes with mask seeds dropout.seed + k and
/// scores the equal-weight mixture. No L2 term.
LossGradient loss_and_gradient(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                               const Eigen::Ref<const Matrix>& y, LossKind kind,
                               const DropoutSpec& dropout = {}, int passes = 1);

struct TrainConfig {
  int hidden_units = 1024;
  double learning_rate = 1e-3;
  double l2 = 1e-5;
  double dropout_rate = 0.0;  // > 0 only for MC-dropout models
  int batch_size = 32;
  int max_epochs = 2000;
  int patience = 100;
  int validation_passes = 10;  // MC-dropout validation mixture size
  std::uint64_t seed = 0;

  /// Throws ConfigError outside the search ranges.
  void validate() const;
  static TrainConfig paper_profile();
  static TrainConfig desk_profile();  // 64 units, 200 epochs
};

/// Tracks the best validation loss and the parameters that achieved it.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Returns true when training should stop.
  bool observe(int epoch, double loss, const MlpParams& params);
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  const MlpParams& best_params() const { return best_; }

 private:
  int patience_;
  int best_epoch_ = -1;
  int since_best_ = 0;
  double best_loss_ = 0.0;
  MlpParams best_;
};

struct TrainResult {
  MlpParams params;
  int best_epoch = -1;
  int epochs_run = 0;
  double best_validation_loss = 0.0;
  std::vector<double> validation_history;
};

/// Mini-batch Adam on mean NLL / kHours + l2 * |W|^2 with early stopping.
/// x are rows of standardized features, y rows of standardized targets.
TrainResult train(const Eigen::Ref<const Matrix>& x_train, const Eigen::Ref<const Matrix>& y_train,
                  const Eigen::Ref<const Matrix>& x_val, const Eigen::Ref<const Matrix>& y_val,
                  const TrainConfig& config);

/// Validation criterion used by train(): Gaussian NLL, or the MC-dropout
/// mixture NLL when the config has a dropout rate.
double validation_loss(const MlpParams& params, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Matrix>& y, const TrainConfig& config);

/// Per-hour equal-weight mixture from member forward passes (standardized units).
std::vector<dist::MixtureDistribution> ensemble_predict(const std::vector<MlpParams>& members,
                                                        const Eigen::Ref<const Vector>& x);

/// Per-hour equal-weight mixture of `passes` dropout forwards, mask seeds
/// seed, seed + 1, ...
std::vector<dist::MixtureDistribution> mc_dropout_predict(const MlpParams& params,
                                                          const Eigen::Ref<const Vector>& x,
                                                          int passes, double rate,
                                                          std::uint64_t seed);

struct HpoSpace {
  double lr_low = 1e-5, lr_high = 1e-1;
  double l2_low = 1e-5, l2_high = 1e-1;
  double dropout_low = 0.01, dropout_high = 0.9;
};

struct HpoTrial {
  TrainConfig config;
  double mean_validation_loss = 0.0;
};

struct HpoResult {
  TrainConfig best;
  std::vector<HpoTrial> trials;
};

/// Seeded random search; learning rate and l2 log-uniform, dropout uniform
/// (sampled only when `with_dropout`). Each trial averages `runs` seeds.
HpoResult random_search(const Eigen::Ref<const Matrix>& x_train,
                        const Eigen::Ref<const Matrix>& y_train,
                        const Eigen::Ref<const Matrix>& x_val, const Eigen::Ref<const Matrix>& y_val,
                        const TrainConfig& base, bool with_dropout, int trials, std::uint64_t seed,
                        int runs = 3, const HpoSpace& space = {});

/// Text tensor dump: a "layers" header line, then one line per tensor
/// "name,rows,cols,v..." in row-major order.
void write_params(const MlpParams& params, std::ostream& out);
MlpParams read_params(std::istream& in, const std::string& source_name = "<stream>");

}  // namespace probcast::neural
