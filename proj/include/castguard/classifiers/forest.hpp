#pragma once

#include <span>
#include <vector>

#include "castguard/classifiers/classifier.hpp"
#include "castguard/random.hpp"

namespace castguard {

/// 1 - p0^2 - p1^2 over the labels at a node. Throws on an empty node.
double gini_impurity(std::span<const std::uint8_t> labels);
double gini_impurity(std::size_t n_non_defect, std::size_t n_defect);

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint8_t label = 0;  // majority label; used at leaves

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeOptions {
  std::size_t max_features = 0;  // features tried per split; 0 = all, in index order
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;     // 0 = unlimited
};

/// CART classification tree with Gini splits.
class DecisionTree {
 public:
  using Options = TreeOptions;

  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// `rows` selects (possibly repeated) training rows. When fewer than all
  /// features are sampled, sampling continues past max_features until a
  /// valid split is found.
  static DecisionTree fit(const FeatureMatrix& features, const Labels& labels,
                          std::span<const std::size_t> rows, const Options& options, Rng& rng);
  /// Plain tree on every row with every feature.
  static DecisionTree fit(const FeatureDataset& train, const Options& options = {});

  std::uint8_t predict(std::span<const float> x) const;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  /// Splits on the longest root-to-leaf path; a lone leaf has depth 0.
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

class RandomForestModel final : public TrainedModel {
 public:
  RandomForestModel(ClassifierSpec spec, std::size_t feature_dim, std::vector<DecisionTree> trees);
  static std::unique_ptr<RandomForestModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  /// Score is the fraction of trees voting defect.
  double decision_point() const noexcept override { return 0.5; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  std::vector<DecisionTree> trees_;
};

}  // namespace castguard
