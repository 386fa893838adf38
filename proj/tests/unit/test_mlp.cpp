#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "castguard/error.hpp"
#include "castguard/mlp.hpp"
#include "castguard/standardize.hpp"
#include "test_support.hpp"

namespace castguard {
namespace {

Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  return x;
}

TEST(Mlp, InitShapesAndDeterminism) {
  const MlpArchitecture arch{{4, 8, 2}, Activation::kRelu, 3};
  const MlpModel a = mlp_init(arch);
  ASSERT_EQ(a.layers.size(), 2u);
  EXPECT_EQ(a.layers[0].weights.rows(), 4);
  EXPECT_EQ(a.layers[0].weights.cols(), 8);
  EXPECT_EQ(a.layers[0].bias.size(), 8);
  EXPECT_EQ(a.layers[1].weights.rows(), 8);
  EXPECT_EQ(a.layers[1].weights.cols(), 2);
  EXPECT_EQ(a.layers[1].bias.size(), 2);
  EXPECT_EQ(a.parameter_count(), 4u * 8 + 8 + 8 * 2 + 2);
  const MlpModel b = mlp_init(arch);
  for (std::size_t l = 0; l < 2; ++l) EXPECT_EQ(a.layers[l].weights, b.layers[l].weights);
  EXPECT_NE(mlp_init({{4, 8, 2}, Activation::kRelu, 4}).layers[0].weights, a.layers[0].weights);
}

TEST(Mlp, SoftmaxStaysOnSimplexForExtremeLogits) {
  for (const double big : {500.0, -500.0, 1e300}) {
    const Eigen::VectorXd p = softmax(Eigen::Vector2d(big, -big));
    EXPECT_TRUE(p.allFinite());
    EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  }
  EXPECT_EQ(softmax(Eigen::Vector2d(500.0, 500.0))(0), 0.5);
}

TEST(Mlp, ZeroWeightsGiveHalfHalf) {
  MlpModel m = mlp_init({{3, 5, 2}, Activation::kTanh, 1});
  for (auto& l : m.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  const Eigen::VectorXd p = mlp_forward(m, Eigen::Vector3d(1, -2, 3));
  EXPECT_EQ(p(0), 0.5);
  EXPECT_EQ(p(1), 0.5);
}

TEST(Mlp, GradientMatchesCentralDifferences) {
  for (const auto& [sizes, act] : std::vector<std::pair<std::vector<std::size_t>, Activation>>{
           {{3, 4, 2}, Activation::kTanh}, {{5, 6, 4, 2}, Activation::kRelu}, {{2, 9, 2}, Activation::kTanh}}) {
    MlpModel m = mlp_init({sizes, act, 21});
    for (auto& l : m.layers) l.bias.setConstant(0.05);
    const Eigen::MatrixXd x = random_inputs(5, static_cast<Eigen::Index>(sizes.front()), 8);
    const Labels y{0, 1, 1, 0, 1};
    const MlpGradient g = mlp_gradient(m, x, y);
    EXPECT_NEAR(g.loss, mlp_loss(m, x, y), 1e-12);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      for (Eigen::Index i = 0; i < m.layers[l].weights.size(); ++i) {
        double& w = m.layers[l].weights.data()[i];
        const double saved = w;
        w = saved + 1e-5;
        const double up = mlp_loss(m, x, y);
        w = saved - 1e-5;
        const double down = mlp_loss(m, x, y);
        w = saved;
        const double numeric = (up - down) / 2e-5;
        const double analytic = g.layers[l].weights.data()[i];
        EXPECT_LE(std::abs(numeric - analytic), 1e-4 * std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
      }
    }
  }
}

TEST(Mlp, DuplicatedBatchKeepsMeanGradient) {
  const MlpModel m = mlp_init({{3, 7, 2}, Activation::kRelu, 2});
  const Eigen::MatrixXd x = random_inputs(4, 3, 1);
  const Labels y{1, 0, 0, 1};
  Eigen::MatrixXd xx(8, 3);
  xx << x, x;
  const Labels yy{1, 0, 0, 1, 1, 0, 0, 1};
  const MlpGradient a = mlp_gradient(m, x, y), b = mlp_gradient(m, xx, yy);
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    EXPECT_LT((a.layers[l].weights - b.layers[l].weights).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Mlp, PerfectFitHasVanishingGradient) {
  MlpModel m = mlp_init({{1, 2, 2}, Activation::kRelu, 0});
  m.layers[0].weights << 1.0, -1.0;
  m.layers[0].bias.setZero();
  m.layers[1].weights << -100.0, 100.0, 100.0, -100.0;
  m.layers[1].bias.setZero();
  Eigen::MatrixXd x(2, 1);
  x << 1.0, -1.0;
  const MlpGradient g = mlp_gradient(m, x, Labels{1, 0});
  EXPECT_LT(g.loss, 1e-20);
  EXPECT_LT(g.norm(), 1e-6);
}

TEST(Mlp, ZeroLearningRateLeavesWeightsUnchanged) {
  const MlpModel m = mlp_init({{4, 6, 2}, Activation::kRelu, 5});
  const Eigen::MatrixXd x = random_inputs(10, 4, 2);
  Labels y(10);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::uint8_t>(i & 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  for (const auto opt : {Optimizer::kAdam, Optimizer::kSgd}) {
    cfg.optimizer = opt;
    const MlpModel t = mlp_train(m, x, y, cfg);
    for (std::size_t l = 0; l < m.layers.size(); ++l) EXPECT_EQ(t.layers[l].weights, m.layers[l].weights);
  }
}

TEST(Mlp, TrainingIsDeterministicAndLearnsSeparableData) {
  const auto ds = test::separable_synth(100, 10, 3);
  const auto [train, test] = split_dataset(ds, {0.75, 3, true});
  const Standardizer z = Standardizer::fit(train.features());
  const Eigen::MatrixXd xtr = z.apply(train.features()), xte = z.apply(test.features());
  TrainConfig cfg;
  cfg.shuffle_seed = 9;
  const MlpModel init = mlp_init({{10, 32, 16, 2}, Activation::kRelu, 4});
  const MlpModel a = mlp_train(init, xtr, train.labels(), cfg);
  const MlpModel b = mlp_train(init, xtr, train.labels(), cfg);
  for (std::size_t l = 0; l < a.layers.size(); ++l) EXPECT_EQ(a.layers[l].weights, b.layers[l].weights);
  ASSERT_EQ(a.training_log.size(), 30u);
  EXPECT_LE(a.training_log.back(), a.training_log.front());

  const Eigen::MatrixXd p = mlp_predict_proba(a, xte);
  std::size_t hit = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) hit += (p(i, 1) >= p(i, 0)) == (test.labels()[static_cast<std::size_t>(i)] == 1);
  EXPECT_GE(static_cast<double>(hit) / static_cast<double>(p.rows()), 0.98);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
}

TEST(Mlp, ExplodingLossReportsEpoch) {
  const MlpModel init = mlp_init({{2, 4, 2}, Activation::kRelu, 1});
  Eigen::MatrixXd x = random_inputs(16, 2, 3) * 1e150;
  Labels y(16);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::uint8_t>(i & 1);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 1e150;
  try {
    mlp_train(init, x, y, cfg);
    FAIL();
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}

TEST(Mlp, DimensionMismatch) {
  const MlpModel m = mlp_init({{3, 4, 2}, Activation::kRelu, 1});
  EXPECT_THROW(mlp_predict_proba(m, Eigen::MatrixXd::Zero(2, 5)), ValidationError);
  EXPECT_THROW(MlpArchitecture({{3, 4, 3}, Activation::kRelu, 0}).validate(), ValidationError);
}

}  // namespace
}  // namespace castguard
