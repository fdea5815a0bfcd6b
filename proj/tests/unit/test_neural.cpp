#include "probcast/neural.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace probcast;
using namespace probcast::neural;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sd * n01(rng);
  return m;
}

// max over coordinates is too noisy near zero; compare whole vectors.
double relative_gap(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

Vector finite_difference(MlpParams params, const Matrix& x, const Matrix& y, LossKind kind,
                         const DropoutSpec& drop, int passes) {
  const Vector theta = params.flatten();
  Vector g(theta.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vector t = theta;
    t(i) += h;
    params.assign(t);
    const double up = loss_and_gradient(params, x, y, kind, drop, passes).loss;
    t(i) -= 2 * h;
    params.assign(t);
    const double down = loss_and_gradient(params, x, y, kind, drop, passes).loss;
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace

TEST(Losses, GaussianNllClosedForm) {
  const Vector mu = Vector::Zero(kHours), lv = Vector::Zero(kHours), y = Vector::Ones(kHours);
  EXPECT_NEAR(nll_gaussian(mu, lv, y), kHours * (0.5 + 0.5 * std::log(2 * M_PI)), 1e-12);
}

TEST(Losses, MixtureNllReferenceValue) {
  Matrix mean(2, 2), logvar(2, 2);
  mean << 0.1, 0.5, -1.0, -2.0;
  logvar << -0.2, 0.4, 0.1, -0.3;
  Vector y(2);
  y << 0.3, -1.2;
  EXPECT_NEAR(gm_nll(mean, logvar, y), 2.0657115895326428282, 1e-12);
  // One component reduces to the Gaussian loss.
  EXPECT_NEAR(gm_nll(mean.col(0), logvar.col(0), y), nll_gaussian(mean.col(0), logvar.col(0), y), 1e-12);
}

TEST(Losses, MixtureNllStableFarInTheTail) {
  Matrix mean = Matrix::Zero(1, 3), logvar = Matrix::Constant(1, 3, -10.0);
  Vector y = Vector::Constant(1, 50.0);
  EXPECT_TRUE(std::isfinite(gm_nll(mean, logvar, y)));
}

TEST(Gradient, GaussianMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    const MlpParams p = init_mlp({6, 5, 5, 2 * kHours}, 100 + t);
    const Matrix x = gaussian(6, 4, rng);
    const Matrix y = gaussian(kHours, 4, rng);
    const auto lg = loss_and_gradient(p, x, y, LossKind::kGaussian);
    EXPECT_LT(relative_gap(lg.gradient.flatten(), finite_difference(p, x, y, LossKind::kGaussian, {}, 1)), 1e-5);
  }
}

TEST(Gradient, MixtureWithDropoutMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const MlpParams p = init_mlp({6, 8, 8, 2 * kHours}, 200 + t);
    const Matrix x = gaussian(6, 3, rng);
    const Matrix y = gaussian(kHours, 3, rng);
    const DropoutSpec drop{0.2, 77u + t};
    const auto lg = loss_and_gradient(p, x, y, LossKind::kMixture, drop, 4);
    EXPECT_LT(relative_gap(lg.gradient.flatten(), finite_difference(p, x, y, LossKind::kMixture, drop, 4)), 1e-5);
  }
}

TEST(Init, HeAndGlorotVariances) {
  const MlpParams p = init_mlp(1024, 5);
  ASSERT_EQ(p.layer_sizes(), (std::vector<int>{kNumFeatures, 1024, 1024, 2 * kHours}));
  auto var = [](const Matrix& w) { return w.squaredNorm() / static_cast<double>(w.size()) - std::pow(w.mean(), 2); };
  EXPECT_NEAR(var(p.weights[0]) / (2.0 / kNumFeatures), 1.0, 0.03);
  EXPECT_NEAR(var(p.weights[1]) / (2.0 / 1024), 1.0, 0.03);
  EXPECT_NEAR(var(p.weights[2]) / (2.0 / (1024 + 48)), 1.0, 0.05);
  EXPECT_EQ(p.biases[0], Vector::Zero(1024));
  EXPECT_EQ(init_mlp(16, 5).flatten(), init_mlp(16, 5).flatten());
}

TEST(Forward, LogVarianceIsClamped) {
  MlpParams p = init_mlp({2, 3, 3, 2 * kHours}, 1);
  p.biases[2].tail(kHours).setConstant(1e3);
  const Vector zero = Vector::Zero(2);
  const auto out = forward(p, Eigen::Ref<const Vector>(zero));
  EXPECT_EQ(out.logvar.maxCoeff(), kLogVarClamp);
}

TEST(Params, TextRoundTrip) {
  const MlpParams p = init_mlp({4, 3, 3, 2 * kHours}, 9);
  std::stringstream ss;
  write_params(p, ss);
  const MlpParams back = read_params(ss);
  EXPECT_EQ(back.layer_sizes(), p.layer_sizes());
  EXPECT_EQ(back.flatten(), p.flatten());
}

TEST(Train, BeatsConstantForecastOnALinearSignal) {
  std::mt19937_64 rng(3);
  const int n = 400, k = 5;
  Matrix x = gaussian(n, k, rng);
  Matrix beta = gaussian(k, kHours, rng, 0.5);
  Matrix y = x * beta + gaussian(n, kHours, rng, 0.3);
  TrainConfig cfg = TrainConfig::desk_profile();
  cfg.hidden_units = 32;
  cfg.max_epochs = 60;
  cfg.learning_rate = 3e-3;
  cfg.seed = 4;
  const auto r = train(x.topRows(300), y.topRows(300), x.bottomRows(100), y.bottomRows(100), cfg);
  ASSERT_TRUE(r.params.all_finite());
  const Matrix xt = x.bottomRows(100).transpose();
  const auto out = forward(r.params, Eigen::Ref<const Matrix>(xt));
  const double mse = (out.mean - y.bottomRows(100).transpose()).squaredNorm() / (100.0 * kHours);
  const double base = (y.bottomRows(100).rowwise() - y.topRows(300).colwise().mean()).squaredNorm() / (100.0 * kHours);
  EXPECT_LT(mse, 0.5 * base);
  EXPECT_EQ(r.best_validation_loss, *std::min_element(r.validation_history.begin(), r.validation_history.end()));
}

TEST(Predict, EnsembleAndDropoutMixtures) {
  const Vector x = Vector::LinSpaced(kNumFeatures, -1.0, 1.0);
  std::vector<MlpParams> members{init_mlp(16, 1), init_mlp(16, 2), init_mlp(16, 3)};
  const auto mix = ensemble_predict(members, x);
  ASSERT_EQ(mix.size(), static_cast<std::size_t>(kHours));
  EXPECT_EQ(mix[0].size(), 3);
  EXPECT_NEAR(mix[5].weights.sum(), 1.0, 1e-15);
  const auto a = mc_dropout_predict(members[0], x, 10, 0.3, 8);
  const auto b = mc_dropout_predict(members[0], x, 10, 0.3, 8);
  EXPECT_EQ(a[7].means, b[7].means);
  EXPECT_EQ(a[7].size(), 10);
}

TEST(Config, SearchRanges) {
  TrainConfig c;
  c.learning_rate = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.dropout_rate = 0.95;
  EXPECT_THROW(c.validate(), ConfigError);
}
