#include "castguard/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {
namespace {

void apply_activation(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
  }
}

// Derivative expressed through the pre-activation z (relu) or the output a (tanh).
Eigen::ArrayXXd activation_derivative(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a,
                                      Activation act) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>();
    case Activation::kTanh:
      return 1.0 - a.array().square();
  }
  return {};
}

void check_inputs(const MlpModel& model, const Eigen::MatrixXd& inputs,
                  std::span<const std::uint8_t> labels) {
  if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
    throw ValidationError("MLP expects " + std::to_string(model.input_dim()) + " inputs, got " +
                          std::to_string(inputs.cols()));
  }
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw ValidationError("MLP batch has " + std::to_string(inputs.rows()) + " rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw ValidationError("MLP batch is empty");
  for (auto y : labels) {
    if (y > 1) throw ValidationError("MLP labels must be 0 or 1");
  }
}

// Row-wise log-softmax.
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // z per layer
  std::vector<Eigen::MatrixXd> post;  // a per layer; post[0] is the input
};

ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  ForwardCache cache;
  cache.post.reserve(model.layers.size() + 1);
  cache.pre.reserve(model.layers.size());
  cache.post.push_back(inputs);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = cache.post.back() * layer.weights;
    z.rowwise() += layer.bias.transpose();
    cache.pre.push_back(z);
    if (l + 1 < model.layers.size()) apply_activation(z, model.architecture.activation);
    cache.post.push_back(std::move(z));
  }
  return cache;
}

double mean_cross_entropy(const Eigen::MatrixXd& log_probs, std::span<const std::uint8_t> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total -= log_probs(static_cast<Eigen::Index>(i), labels[i]);
  }
  return total / static_cast<double>(labels.size());
}

}  // namespace

void MlpArchitecture::validate() const {
  if (layer_sizes.size() < 3) {
    throw ValidationError("MLP needs an input layer, at least one hidden layer and an output layer");
  }
  if (layer_sizes.back() != 2) throw ValidationError("MLP output layer must have exactly 2 units");
  for (auto s : layer_sizes) {
    if (s == 0) throw ValidationError("MLP layer sizes must be positive");
  }
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0) throw ValidationError("epochs and batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be a finite nonnegative number");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw ValidationError("invalid Adam constants");
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

double MlpGradient::norm() const {
  double sq = 0.0;
  for (const auto& l : layers) sq += l.weights.squaredNorm() + l.bias.squaredNorm();
  return std::sqrt(sq);
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

MlpModel mlp_init(const MlpArchitecture& arch) {
  arch.validate();
  MlpModel model;
  model.architecture = arch;
  Rng rng = make_rng(arch.seed);
  const std::size_t n_layers = arch.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto fan_in = static_cast<Eigen::Index>(arch.layer_sizes[l]);
    const auto fan_out = static_cast<Eigen::Index>(arch.layer_sizes[l + 1]);
    const bool output = l + 1 == n_layers;
    const double limit = output ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                : std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weights.resize(fan_in, fan_out);
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weights(i, j) = dist(rng);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Eigen::MatrixXd mlp_logits(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
    throw ValidationError("MLP expects " + std::to_string(model.input_dim()) + " inputs, got " +
                          std::to_string(inputs.cols()));
  }
  return forward_batch(model, inputs).post.back();
}

Eigen::MatrixXd mlp_predict_proba(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  return log_softmax_rows(mlp_logits(model, inputs)).array().exp().matrix();
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::MatrixXd row = x.transpose();
  return softmax(mlp_logits(model, row).row(0).transpose());
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                std::span<const std::uint8_t> labels) {
  check_inputs(model, inputs, labels);
  return mean_cross_entropy(log_softmax_rows(forward_batch(model, inputs).post.back()), labels);
}

MlpGradient mlp_gradient(const MlpModel& model, const Eigen::MatrixXd& inputs,
                         std::span<const std::uint8_t> labels) {
  check_inputs(model, inputs, labels);
  const ForwardCache cache = forward_batch(model, inputs);
  const Eigen::MatrixXd log_probs = log_softmax_rows(cache.post.back());

  MlpGradient grad;
  grad.loss = mean_cross_entropy(log_probs, labels);
  grad.layers.resize(model.layers.size());

  // d(mean CE)/d(logits) = (softmax - onehot) / batch
  Eigen::MatrixXd delta = log_probs.array().exp().matrix();
  for (std::size_t i = 0; i < labels.size(); ++i) delta(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
  delta /= static_cast<double>(labels.size());

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grad.layers[l].weights = cache.post[l].transpose() * delta;
    grad.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * model.layers[l].weights.transpose();
      delta = (upstream.array() *
               activation_derivative(cache.pre[l - 1], cache.post[l], model.architecture.activation))
                  .matrix();
    }
  }
  return grad;
}

MlpModel mlp_train(MlpModel model, const Eigen::MatrixXd& inputs,
                   std::span<const std::uint8_t> labels, const TrainConfig& config) {
  config.validate();
  check_inputs(model, inputs, labels);
  const bool has_defect = std::find(labels.begin(), labels.end(), kDefect) != labels.end();
  const bool has_ok = std::find(labels.begin(), labels.end(), kNonDefect) != labels.end();
  if (!has_defect || !has_ok) throw TrainingError("degenerate training set: MLP needs both classes");

  const std::size_t n = labels.size();
  const std::size_t n_layers = model.layers.size();
  std::vector<DenseLayer> m(n_layers), v(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    m[l].weights = Eigen::MatrixXd::Zero(model.layers[l].weights.rows(), model.layers[l].weights.cols());
    m[l].bias = Eigen::VectorXd::Zero(model.layers[l].bias.size());
    v[l] = m[l];
  }

  Rng rng = make_rng(config.shuffle_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t step = 0;
  model.training_log.clear();
  model.training_log.reserve(config.epochs);

  Eigen::MatrixXd batch;
  std::vector<std::uint8_t> batch_labels;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      batch.resize(static_cast<Eigen::Index>(stop - start), inputs.cols());
      batch_labels.resize(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = inputs.row(static_cast<Eigen::Index>(order[i]));
        batch_labels[i - start] = labels[order[i]];
      }
      const MlpGradient g = mlp_gradient(model, batch, batch_labels);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += g.loss * static_cast<double>(stop - start);

      ++step;
      if (config.optimizer == Optimizer::kSgd) {
        for (std::size_t l = 0; l < n_layers; ++l) {
          model.layers[l].weights -= config.learning_rate * g.layers[l].weights;
          model.layers[l].bias -= config.learning_rate * g.layers[l].bias;
        }
        continue;
      }
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = config.beta1 * mom + (1.0 - config.beta1) * grad;
        vel = config.beta2 * vel + (1.0 - config.beta2) * grad.cwiseProduct(grad);
        param.array() -= config.learning_rate * (mom.array() / c1) /
                         ((vel.array() / c2).sqrt() + config.epsilon);
      };
      for (std::size_t l = 0; l < n_layers; ++l) {
        adam(model.layers[l].weights, m[l].weights, v[l].weights, g.layers[l].weights);
        adam(model.layers[l].bias, m[l].bias, v[l].bias, g.layers[l].bias);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    model.training_log.push_back(epoch_loss);
  }
  return model;
}

MlpModel mlp_train(MlpModel model, const FeatureDataset& train, const TrainConfig& config) {
  return mlp_train(std::move(model), train.features().cast<double>().eval(), train.labels(), config);
}

}  // namespace castguard
