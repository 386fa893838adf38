#pragma once

#include "castguard/classifiers/classifier.hpp"
#include "castguard/standardize.hpp"

namespace castguard {

/// Laplace approximation to the latent posterior of a zero-mean GP classifier
/// with logistic likelihood. Stores what prediction needs.
struct GpPosterior {
  GpConfig config;
  Eigen::MatrixXd inputs;         // n x d training inputs
  Eigen::VectorXd targets;        // 0/1
  Eigen::VectorXd latent_mode;    // f-hat
  Eigen::VectorXd grad_log_lik;   // d log p(y|f) / df at the mode
  Eigen::VectorXd sqrt_w;         // sqrt of the negative log-likelihood Hessian
  Eigen::MatrixXd chol_b;         // lower Cholesky factor of I + W^1/2 K W^1/2
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

/// Newton iterations for the posterior mode. Throws TrainingError if the
/// gradient norm is still above newton_tol after max_newton_iters, and
/// ValidationError when n exceeds config.max_samples.
GpPosterior gp_laplace_fit(const Eigen::MatrixXd& inputs, const Labels& labels,
                           const GpConfig& config);
GpPosterior gp_laplace_fit(const FeatureDataset& train, const GpConfig& config);

/// Predictive P(defect | x) with the probit-style correction
/// sigmoid(mean / sqrt(1 + pi * var / 8)).
double gp_predict_point(const GpPosterior& posterior, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Row-wise version of gp_predict_point.
Eigen::VectorXd gp_predict_proba(const GpPosterior& posterior, const Eigen::MatrixXd& inputs);

/// Recomputes sqrt_w, grad_log_lik and chol_b from inputs, targets and latent_mode.
void gp_refresh_factorization(GpPosterior& posterior);

class GaussianProcessModel final : public TrainedModel {
 public:
  GaussianProcessModel(ClassifierSpec spec, Standardizer standardizer, GpPosterior posterior);
  static std::unique_ptr<GaussianProcessModel> fit(const ClassifierSpec& spec,
                                                   const FeatureDataset& train);

  double decision_point() const noexcept override { return 0.5; }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  const GpPosterior& posterior() const noexcept { return posterior_; }

 protected:
  Eigen::VectorXd score_rows(const FeatureMatrix& features) const override;

 private:
  Standardizer standardizer_;
  GpPosterior posterior_;
};

}  // namespace castguard
