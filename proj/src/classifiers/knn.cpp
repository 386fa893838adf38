#include "castguard/classifiers/knn.hpp"

#include <algorithm>
#include <numeric>

#include "castguard/error.hpp"

namespace castguard {

std::vector<Neighbor> knn_distances(std::span<const float> query, const FeatureMatrix& train,
                                    std::size_t k) {
  const auto n = static_cast<std::size_t>(train.rows());
  if (k == 0 || k > n) {
    throw ValidationError("k = " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }
  if (query.size() != static_cast<std::size_t>(train.cols())) {
    throw ValidationError("dimension mismatch: query has " + std::to_string(query.size()) +
                          " features, training rows have " + std::to_string(train.cols()));
  }
  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = train.data() + i * static_cast<std::size_t>(train.cols());
    double sq = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
      const double diff = static_cast<double>(row[j]) - static_cast<double>(query[j]);
      sq += diff * diff;
    }
    all[i] = {i, sq};
  }
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

std::vector<Neighbor> knn_distances(std::span<const float> query, const FeatureDataset& train,
                                    std::size_t k) {
  return knn_distances(query, train.features(), k);
}

double knn_vote_score(const std::vector<Neighbor>& neighbors, const Labels& train_labels) {
  if (neighbors.empty()) throw ValidationError("no neighbors to vote");
  std::size_t defect_votes = 0;
  for (const auto& nb : neighbors) defect_votes += train_labels[nb.index] == kDefect ? 1 : 0;
  const double fraction = static_cast<double>(defect_votes) / static_cast<double>(neighbors.size());
  if (2 * defect_votes == neighbors.size()) {
    constexpr double kTieBias = 1e-6;
    return fraction + (train_labels[neighbors.front().index] == kDefect ? kTieBias : -kTieBias);
  }
  return fraction;
}

KnnModel::KnnModel(ClassifierSpec spec, FeatureMatrix train, Labels labels)
    : TrainedModel(std::move(spec), static_cast<std::size_t>(train.cols())),
      train_(std::move(train)),
      labels_(std::move(labels)) {}

std::unique_ptr<KnnModel> KnnModel::fit(const ClassifierSpec& spec, const FeatureDataset& train) {
  const auto& p = std::get<KnnParams>(spec.params);
  if (p.k > train.size()) {
    throw ValidationError("knn k = " + std::to_string(p.k) + " exceeds training size " +
                          std::to_string(train.size()));
  }
  return std::make_unique<KnnModel>(spec, train.features(), train.labels());
}

Eigen::VectorXd KnnModel::score_rows(const FeatureMatrix& features) const {
  Eigen::VectorXd out(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    std::span<const float> q(features.data() + static_cast<std::size_t>(i) * d, d);
    out(i) = knn_vote_score(knn_distances(q, train_, k()), labels_);
  }
  return out;
}

}  // namespace castguard
