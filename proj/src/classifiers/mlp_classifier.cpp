#include "castguard/classifiers/mlp_classifier.hpp"

#include "castguard/random.hpp"

namespace castguard {

MlpClassifierModel::MlpClassifierModel(ClassifierSpec spec, Standardizer standardizer, MlpModel network)
    : TrainedModel(std::move(spec), standardizer.dim()),
      standardizer_(std::move(standardizer)),
      network_(std::move(network)) {}

std::unique_ptr<MlpClassifierModel> MlpClassifierModel::fit(const ClassifierSpec& spec,
                                                            const FeatureDataset& train) {
  require_both_classes(train.labels(), "mlp");
  const auto& p = std::get<MlpParams>(spec.params);
  MlpArchitecture arch;
  arch.layer_sizes.push_back(train.feature_dim());
  arch.layer_sizes.insert(arch.layer_sizes.end(), p.hidden_sizes.begin(), p.hidden_sizes.end());
  arch.layer_sizes.push_back(2);
  arch.activation = p.activation;
  arch.seed = derive_seed(spec.seed, 0);
  TrainConfig cfg = p.train;
  cfg.shuffle_seed = derive_seed(spec.seed, 1);

  Standardizer standardizer = Standardizer::fit(train.features());
  MlpModel net = mlp_train(mlp_init(arch), standardizer.apply(train.features()), train.labels(), cfg);
  return std::make_unique<MlpClassifierModel>(spec, std::move(standardizer), std::move(net));
}

Eigen::VectorXd MlpClassifierModel::score_rows(const FeatureMatrix& features) const {
  return mlp_predict_proba(network_, standardizer_.apply(features)).col(1);
}

}  // namespace castguard
