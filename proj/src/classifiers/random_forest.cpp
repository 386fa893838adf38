#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "castguard/classifiers/forest.hpp"
#include "castguard/error.hpp"

namespace castguard {

double gini_impurity(std::size_t n_non_defect, std::size_t n_defect) {
  const std::size_t n = n_non_defect + n_defect;
  if (n == 0) throw ValidationError("gini impurity of an empty node");
  const double p0 = static_cast<double>(n_non_defect) / static_cast<double>(n);
  const double p1 = static_cast<double>(n_defect) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

double gini_impurity(std::span<const std::uint8_t> labels) {
  const auto n1 = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kDefect));
  return gini_impurity(labels.size() - n1, n1);
}

namespace {

struct Split {
  std::int32_t feature = TreeNode::kLeaf;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& features, const Labels& labels,
              const DecisionTree::Options& options, Rng& rng)
      : x_(features), y_(labels), opts_(options), rng_(rng) {
    const auto d = static_cast<std::size_t>(features.cols());
    sample_features_ = opts_.max_features != 0 && opts_.max_features < d;
    perm_.resize(d);
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 1);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::size_t n1 = 0;
    for (const auto r : rows) n1 += y_[r] == kDefect ? 1 : 0;
    const std::size_t n0 = rows.size() - n1;
    nodes_[id].label = n1 >= n0 ? kDefect : kNonDefect;

    const bool depth_capped = opts_.max_depth != 0 && depth > opts_.max_depth;
    if (n0 == 0 || n1 == 0 || depth_capped || rows.size() < 2 * opts_.min_leaf) return id;

    const Split split = best_split(rows, n0, n1);
    if (split.feature == TreeNode::kLeaf) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (const auto r : rows) {
      const double v = x_(static_cast<Eigen::Index>(r), split.feature);
      (v <= split.threshold ? left : right).push_back(r);
    }
    rows = {};
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    const std::int32_t l = grow(std::move(left), depth + 1);
    nodes_[id].left = l;
    const std::int32_t r = grow(std::move(right), depth + 1);
    nodes_[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t n0, std::size_t n1) {
    const std::size_t d = perm_.size();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d; ++k) {
      if (sample_features_) {
        if (k >= opts_.max_features && best.feature != TreeNode::kLeaf) break;
        std::uniform_int_distribution<std::size_t> pick(k, d - 1);
        std::swap(perm_[k], perm_[pick(rng_)]);
      }
      scan_feature(rows, perm_[k], n0, n1, best);
    }
    return best;
  }

  void scan_feature(const std::vector<std::size_t>& rows, std::size_t feature, std::size_t n0,
                    std::size_t n1, Split& best) {
    const auto f = static_cast<Eigen::Index>(feature);
    column_.clear();
    for (const auto r : rows) column_.emplace_back(x_(static_cast<Eigen::Index>(r), f), y_[r]);
    std::sort(column_.begin(), column_.end());

    const std::size_t n = rows.size();
    std::size_t left0 = 0;
    std::size_t left1 = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (column_[i].second == kDefect ? left1 : left0) += 1;
      if (column_[i].first == column_[i + 1].first) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < opts_.min_leaf || nr < opts_.min_leaf) continue;
      const double impurity =
          (static_cast<double>(nl) * gini_impurity(left0, left1) +
           static_cast<double>(nr) * gini_impurity(n0 - left0, n1 - left1)) /
          static_cast<double>(n);
      if (impurity < best.impurity) {
        best.impurity = impurity;
        best.feature = static_cast<std::int32_t>(feature);
        best.threshold =
            0.5 * (static_cast<double>(column_[i].first) + static_cast<double>(column_[i + 1].first));
      }
    }
  }

  const FeatureMatrix& x_;
  const Labels& y_;
  const DecisionTree::Options& opts_;
  Rng& rng_;
  bool sample_features_ = false;
  std::vector<std::size_t> perm_;
  std::vector<std::pair<float, std::uint8_t>> column_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree DecisionTree::fit(const FeatureMatrix& features, const Labels& labels,
                               std::span<const std::size_t> rows, const Options& options, Rng& rng) {
  if (rows.empty()) throw ValidationError("decision tree needs at least one training row");
  if (options.min_leaf == 0) throw ValidationError("decision tree min_leaf must be positive");
  for (const auto r : rows) {
    if (r >= labels.size()) throw ValidationError("decision tree row index out of range");
  }
  TreeBuilder builder(features, labels, options, rng);
  return DecisionTree(builder.build(std::vector<std::size_t>(rows.begin(), rows.end())));
}

DecisionTree DecisionTree::fit(const FeatureDataset& train, const Options& options) {
  std::vector<std::size_t> rows(train.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng = make_rng(0);
  return fit(train.features(), train.labels(), rows, options, rng);
}

std::uint8_t DecisionTree::predict(std::span<const float> x) const {
  if (nodes_.empty()) throw ValidationError("decision tree is empty");
  std::size_t i = 0;
  while (nodes_[i].feature != TreeNode::kLeaf) {
    const auto& node = nodes_[i];
    const double v = x[static_cast<std::size_t>(node.feature)];
    i = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
  }
  return nodes_[i].label;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, level] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, level);
    if (nodes_[i].feature != TreeNode::kLeaf) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), level + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), level + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) {
    return n.feature == TreeNode::kLeaf;
  }));
}

RandomForestModel::RandomForestModel(ClassifierSpec spec, std::size_t feature_dim,
                                     std::vector<DecisionTree> trees)
    : TrainedModel(std::move(spec), feature_dim), trees_(std::move(trees)) {}

std::unique_ptr<RandomForestModel> RandomForestModel::fit(const ClassifierSpec& spec,
                                                          const FeatureDataset& train) {
  const auto& p = std::get<ForestParams>(spec.params);
  const std::size_t d = train.feature_dim();
  const std::size_t n = train.size();
  DecisionTree::Options opts;
  opts.max_features = p.max_features == 0
                          ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                          : p.max_features;
  if (opts.max_features >= d) opts.max_features = 0;
  opts.min_leaf = p.min_leaf;
  opts.max_depth = p.max_depth;

  std::vector<DecisionTree> trees;
  trees.reserve(p.n_trees);
  std::vector<std::size_t> rows(n);
  for (std::size_t t = 0; t < p.n_trees; ++t) {
    Rng rng = make_rng(derive_seed(spec.seed, t));
    if (p.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    trees.push_back(DecisionTree::fit(train.features(), train.labels(), rows, opts, rng));
  }
  return std::make_unique<RandomForestModel>(spec, d, std::move(trees));
}

Eigen::VectorXd RandomForestModel::score_rows(const FeatureMatrix& features) const {
  Eigen::VectorXd out(features.rows());
  const auto d = static_cast<std::size_t>(features.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    std::span<const float> x(features.data() + static_cast<std::size_t>(i) * d, d);
    std::size_t votes = 0;
    for (const auto& tree : trees_) votes += tree.predict(x) == kDefect ? 1 : 0;
    out(i) = trees_.empty() ? 0.0 : static_cast<double>(votes) / static_cast<double>(trees_.size());
  }
  return out;
}

}  // namespace castguard
