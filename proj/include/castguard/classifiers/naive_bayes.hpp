#pragma once

#include <array>

#include "castguard/classifiers/classifier.hpp"

namespace castguard {

/// Per-class priors and per-feature Gaussian parameters, indexed by label.
/// A class absent from training has prior 0 and never wins.
struct GaussianNbState {
  std::array<double, 2> prior{0.0, 0.0};
  std::array<Eigen::VectorXd, 2> mean;
  std::array<Eigen::VectorXd, 2> variance;
};

/// Variances get var_smoothing * (largest per-feature variance of the whole
/// training set) added, floored at var_smoothing when all features are constant.
GaussianNbState fit_gaussian_nb(const FeatureDataset& train, double var_smoothing = 1e-9);

/// Bayes-rule posterior {P(non-defect | x), P(defect | x)}, evaluated in log space.
std::array<double, 2> gaussian_nb_posterior(const GaussianNbState& state,
                                            const Eigen::Ref<const Eigen::VectorXd>& x);

class GaussianNbModel final : public TrainedModel {
 public:
  GaussianNbModel(ClassifierSpec spec, GaussianNbState state);
  static std::unique_ptr<GaussianNbModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.5; }
  const GaussianNbState& state() const noexcept { return state_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  GaussianNbState state_;
};

}  // namespace castguard
