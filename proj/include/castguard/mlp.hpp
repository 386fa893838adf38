#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "castguard/dataset.hpp"

namespace castguard {

enum class Activation : std::uint8_t { kRelu = 0, kTanh = 1 };
enum class Optimizer : std::uint8_t { kAdam = 0, kSgd = 1 };

/// Layer sizes run input -> hidden... -> 2 (softmax over non-defect/defect).
struct MlpArchitecture {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;

  std::size_t input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

/// Fully connected layer; weights are (fan_in x fan_out).
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

struct MlpModel {
  MlpArchitecture architecture;
  std::vector<DenseLayer> layers;
  std::vector<double> training_log;  // mean cross-entropy per epoch

  std::size_t input_dim() const { return architecture.input_dim(); }
  std::size_t parameter_count() const;
};

/// Same shapes as the model's layers.
struct MlpGradient {
  std::vector<DenseLayer> layers;
  double loss = 0.0;

  double norm() const;
};

/// Numerically stable softmax (max-subtracted).
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

/// He-uniform weights for layers feeding the hidden nonlinearity, Glorot-uniform
/// for the output layer, zero biases. Deterministic in `arch.seed`.
MlpModel mlp_init(const MlpArchitecture& arch);

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Row-wise class probabilities, n x 2.
Eigen::MatrixXd mlp_predict_proba(const MlpModel& model, const Eigen::MatrixXd& inputs);
/// Pre-softmax outputs, n x 2.
Eigen::MatrixXd mlp_logits(const MlpModel& model, const Eigen::MatrixXd& inputs);

/// Exact gradient of the mean cross-entropy over the batch.
MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         std::span<const std::uint8_t> labels);

/// Mean cross-entropy of the batch without computing gradients.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                std::span<const std::uint8_t> labels);

/// Mini-batch training. Throws TrainingError when the loss stops being finite.
MlpModel mlp_train(MlpModel model, const Eigen::MatrixXd& inputs,
                   std::span<const std::uint8_t> labels, const TrainConfig& config);
/// Trains on the raw dataset features (no standardization).
MlpModel mlp_train(MlpModel model, const FeatureDataset& train, const TrainConfig& config);

}  // namespace castguard
