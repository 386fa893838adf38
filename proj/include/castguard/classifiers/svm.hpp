#pragma once

#include "castguard/classifiers/classifier.hpp"
#include "castguard/standardize.hpp"

namespace castguard {

// --- linear ------------------------------------------------------------------

struct LinearSvmSolution {
  Eigen::VectorXd weights;
  double bias = 0.0;
};

/// Soft-margin primal solved by stochastic subgradient steps (Pegasos):
/// lambda = 1 / (reg_c * n), step 1 / (lambda * t), one pass over a fresh
/// permutation per epoch, iterate projected onto the 1/sqrt(lambda) ball.
/// The bias is an extra weight on a constant input of 1.
LinearSvmSolution linear_svm_train(const Eigen::MatrixXd& inputs, const Labels& labels,
                                   double reg_c, std::size_t epochs, std::uint64_t seed);
LinearSvmSolution linear_svm_train(const FeatureDataset& train, double reg_c, std::size_t epochs,
                                   std::uint64_t seed);

/// Mean hinge loss max(0, 1 - y (w.x + b)) with y in {-1, +1}.
double mean_hinge_loss(const LinearSvmSolution& svm, const Eigen::MatrixXd& inputs,
                       const Labels& labels);

class LinearSvmModel final : public TrainedModel {
 public:
  LinearSvmModel(ClassifierSpec spec, Standardizer standardizer, LinearSvmSolution solution);
  static std::unique_ptr<LinearSvmModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.0; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  const LinearSvmSolution& solution() const noexcept { return solution_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  Standardizer standardizer_;
  LinearSvmSolution solution_;
};

// --- RBF kernel --------------------------------------------------------------

struct RbfSvmSolution {
  Eigen::MatrixXd support;  // rows with nonzero dual coefficient
  Eigen::VectorXd coef;     // alpha_i * y_i
  double sigma = 1.0;
  RbfForm kernel_form = RbfForm::kSquared;
  std::size_t passes = 0;
  bool converged = false;
};

/// Median of all pairwise Euclidean distances between rows.
double median_pairwise_distance(const Eigen::MatrixXd& inputs);

/// Dual coordinate ascent on the box-constrained kernel SVM dual. The bias is
/// absorbed by adding 1 to the kernel, so no equality constraint is needed.
RbfSvmSolution rbf_svm_train(const Eigen::MatrixXd& inputs, const Labels& labels,
                             const RbfSvmParams& params, std::uint64_t seed);

/// sum_i coef_i (k(s_i, x) + 1)
Eigen::VectorXd rbf_svm_decision(const RbfSvmSolution& svm, const Eigen::MatrixXd& inputs);

class RbfSvmModel final : public TrainedModel {
 public:
  RbfSvmModel(ClassifierSpec spec, Standardizer standardizer, RbfSvmSolution solution);
  static std::unique_ptr<RbfSvmModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.0; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  const RbfSvmSolution& solution() const noexcept { return solution_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  Standardizer standardizer_;
  RbfSvmSolution solution_;
};

}  // namespace castguard
