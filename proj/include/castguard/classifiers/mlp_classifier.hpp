#pragma once

#include "castguard/classifiers/classifier.hpp"
#include "castguard/mlp.hpp"
#include "castguard/standardize.hpp"

namespace castguard {

/// Standalone MLP classifier: standardized inputs, softmax output, score is
/// P(defect).
class MlpClassifierModel final : public TrainedModel {
 public:
  MlpClassifierModel(ClassifierSpec spec, Standardizer standardizer, MlpModel network);
  static std::unique_ptr<MlpClassifierModel> fit(const ClassifierSpec& spec,
                                                 const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.5; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  const MlpModel& network() const noexcept { return network_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  Standardizer standardizer_;
  MlpModel network_;
};

}  // namespace castguard
