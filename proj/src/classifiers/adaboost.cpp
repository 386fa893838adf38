#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "castguard/classifiers/adaboost.hpp"
#include "castguard/error.hpp"

namespace castguard {

StumpPool::StumpPool(const FeatureMatrix& features, const Labels& labels)
    : features_(features), labels_(labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ValidationError("stump pool features and labels differ in length");
  }
  const auto n = static_cast<std::uint32_t>(labels.size());
  order_.resize(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index f = 0; f < features.cols(); ++f) {
    auto& ord = order_[static_cast<std::size_t>(f)];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), std::uint32_t{0});
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
      return features(a, f) < features(b, f);
    });
  }
}

StumpPool::Best StumpPool::best(std::span<const double> weights) const {
  if (weights.size() != labels_.size()) throw ValidationError("stump weights have the wrong length");
  double w_pos = 0.0;
  double w_neg = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) (labels_[i] == kDefect ? w_pos : w_neg) += weights[i];

  Best best;
  best.error = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t feature, double threshold, double below_pos, double below_neg) {
    // polarity +1: defect above the threshold
    const double err_plus = below_pos + (w_neg - below_neg);
    const double err_minus = below_neg + (w_pos - below_pos);
    if (err_plus < best.error) best = {{feature, threshold, 1}, err_plus};
    if (err_minus < best.error) best = {{feature, threshold, -1}, err_minus};
  };

  for (std::size_t f = 0; f < order_.size(); ++f) {
    const auto& ord = order_[f];
    const auto col = static_cast<Eigen::Index>(f);
    double below_pos = 0.0;
    double below_neg = 0.0;
    consider(f, -std::numeric_limits<double>::infinity(), 0.0, 0.0);
    for (std::size_t k = 0; k + 1 < ord.size(); ++k) {
      const std::uint32_t r = ord[k];
      (labels_[r] == kDefect ? below_pos : below_neg) += weights[r];
      const float v = features_(r, col);
      const float next = features_(ord[k + 1], col);
      if (v == next) continue;
      consider(f, 0.5 * (static_cast<double>(v) + static_cast<double>(next)), below_pos, below_neg);
    }
  }
  best.error = std::clamp(best.error, 0.0, 1.0);
  return best;
}

double adaboost_alpha(double weighted_error) {
  if (weighted_error < kAdaBoostMinError) return 0.5 * std::log(1.0 / kAdaBoostMinError);
  return 0.5 * std::log((1.0 - weighted_error) / weighted_error);
}

std::optional<AdaBoostRound> adaboost_round(std::span<const double> weights, const StumpPool& pool) {
  const StumpPool::Best best = pool.best(weights);
  if (best.error >= 0.5) return std::nullopt;

  AdaBoostRound round;
  round.stump = best.stump;
  round.error = best.error;
  round.alpha = adaboost_alpha(best.error);
  round.weights.resize(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const int agree = pool.vote(best.stump, i) * pool.target(i);
    round.weights[i] = weights[i] * std::exp(-round.alpha * agree);
    total += round.weights[i];
  }
  for (auto& w : round.weights) w /= total;
  return round;
}

AdaBoostModel::AdaBoostModel(ClassifierSpec spec, std::size_t feature_dim, std::vector<Stump> stumps,
                             std::vector<double> alphas)
    : TrainedModel(std::move(spec), feature_dim), stumps_(std::move(stumps)), alphas_(std::move(alphas)) {
  if (stumps_.size() != alphas_.size()) throw ValidationError("AdaBoost stumps and alphas differ in count");
}

std::unique_ptr<AdaBoostModel> AdaBoostModel::fit(const ClassifierSpec& spec, const FeatureDataset& train) {
  require_both_classes(train.labels(), "adaboost");
  const auto& p = std::get<AdaBoostParams>(spec.params);
  const StumpPool pool(train.features(), train.labels());
  std::vector<double> weights(train.size(), 1.0 / static_cast<double>(train.size()));
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  for (std::size_t t = 0; t < p.n_rounds; ++t) {
    auto round = adaboost_round(weights, pool);
    if (!round) break;
    stumps.push_back(round->stump);
    alphas.push_back(round->alpha);
    weights = std::move(round->weights);
    // A perfect stump already separates the training set.
    if (round->error < kAdaBoostMinError) break;
  }
  return std::make_unique<AdaBoostModel>(spec, train.feature_dim(), std::move(stumps), std::move(alphas));
}

Eigen::VectorXd AdaBoostModel::staged_score(const FeatureMatrix& features, std::size_t rounds) const {
  if (static_cast<std::size_t>(features.cols()) != feature_dim()) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(feature_dim()) +
                          " features, got " + std::to_string(features.cols()));
  }
  rounds = std::min(rounds, stumps_.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < rounds; ++t) {
      s += alphas_[t] * stumps_[t].vote(features(i, static_cast<Eigen::Index>(stumps_[t].feature)));
    }
    out(i) = s;
  }
  return out;
}

Eigen::VectorXd AdaBoostModel::score_rows(const FeatureMatrix& features) const {
  return staged_score(features, stumps_.size());
}

}  // namespace castguard
