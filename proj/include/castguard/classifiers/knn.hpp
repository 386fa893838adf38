#pragma once

#include <span>
#include <vector>

#include "castguard/classifiers/classifier.hpp"

namespace castguard {

struct Neighbor {
  std::size_t index;
  double distance;
};

/// The k training rows closest to `query` in Euclidean distance, ascending,
/// ties broken by lower row index.
std::vector<Neighbor> knn_distances(std::span<const float> query, const FeatureMatrix& train,
                                    std::size_t k);
std::vector<Neighbor> knn_distances(std::span<const float> query, const FeatureDataset& train,
                                    std::size_t k);

/// Fraction of neighbors labelled defect. An exact tie is broken toward the
/// nearest neighbor's label by a 1e-6 nudge.
double knn_vote_score(const std::vector<Neighbor>& neighbors, const Labels& train_labels);

class KnnModel final : public TrainedModel {
 public:
  KnnModel(ClassifierSpec spec, FeatureMatrix train, Labels labels);
  static std::unique_ptr<KnnModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.5; }
  std::size_t k() const { return std::get<KnnParams>(spec().params).k; }
  const FeatureMatrix& train_features() const noexcept { return train_; }
  const Labels& train_labels() const noexcept { return labels_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  FeatureMatrix train_;
  Labels labels_;
};

}  // namespace castguard
