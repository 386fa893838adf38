#pragma once

#include <optional>
#include <span>
#include <vector>

#include "castguard/classifiers/classifier.hpp"

namespace castguard {

/// Threshold on one feature. polarity +1 votes defect when x > threshold,
/// polarity -1 votes defect when x <= threshold. Output is +1 (defect) or -1.
struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;

  int vote(float value) const noexcept {
    const bool above = static_cast<double>(value) > threshold;
    return (above == (polarity > 0)) ? 1 : -1;
  }
};

/// Every single-feature stump over the training set, searchable by weighted
/// error. Each feature is sorted once up front.
class StumpPool {
 public:
  StumpPool(const FeatureMatrix& features, const Labels& labels);

  struct Best {
    Stump stump;
    double error = 0.0;
  };

  /// Minimum weighted error stump; ties go to the lowest feature, then the
  /// lowest threshold, then polarity +1.
  Best best(std::span<const double> weights) const;

  int vote(const Stump& stump, std::size_t row) const noexcept {
    return stump.vote(features_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(stump.feature)));
  }
  /// +1 for defect, -1 otherwise.
  int target(std::size_t row) const noexcept { return labels_[row] == kDefect ? 1 : -1; }
  std::size_t size() const noexcept { return labels_.size(); }

 private:
  const FeatureMatrix& features_;
  const Labels& labels_;
  std::vector<std::vector<std::uint32_t>> order_;  // per feature, rows by ascending value
};

inline constexpr double kAdaBoostMinError = 1e-12;

/// 0.5 ln((1 - e) / e); for e < 1e-12 the value is capped at 0.5 ln(1e12).
double adaboost_alpha(double weighted_error);

struct AdaBoostRound {
  Stump stump;
  double alpha = 0.0;
  double error = 0.0;
  std::vector<double> weights;  // renormalized to sum 1
};

/// One boosting round. Returns nullopt when the best stump's weighted error
/// is >= 0.5, which ends training with the current ensemble.
std::optional<AdaBoostRound> adaboost_round(std::span<const double> weights, const StumpPool& pool);

class AdaBoostModel final : public TrainedModel {
 public:
  AdaBoostModel(ClassifierSpec spec, std::size_t feature_dim, std::vector<Stump> stumps,
                std::vector<double> alphas);
  static std::unique_ptr<AdaBoostModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  /// Score is sum_t alpha_t * vote_t(x).
  double decision_point() const noexcept override { return 0.0; }
  const std::vector<Stump>& stumps() const noexcept { return stumps_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }

  /// Score after only the first `rounds` stumps.
  Eigen::VectorXd staged_score(const FeatureMatrix& features, std::size_t rounds) const;

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  std::vector<Stump> stumps_;
  std::vector<double> alphas_;
};

}  // namespace castguard
