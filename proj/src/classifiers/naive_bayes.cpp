#include "castguard/classifiers/naive_bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "castguard/error.hpp"

namespace castguard {

GaussianNbState fit_gaussian_nb(const FeatureDataset& train, double var_smoothing) {
  const Eigen::Index d = static_cast<Eigen::Index>(train.feature_dim());
  const Eigen::MatrixXd x = train.features().cast<double>();
  const auto n = static_cast<double>(train.size());

  // Smoothing scale comes from the pooled per-feature variances.
  const Eigen::RowVectorXd overall_mean = x.colwise().mean();
  const double max_var = (x.rowwise() - overall_mean).array().square().colwise().sum().maxCoeff() / n;
  const double epsilon = max_var > 0.0 ? var_smoothing * max_var : var_smoothing;

  GaussianNbState state;
  for (std::uint8_t c : {kNonDefect, kDefect}) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    std::size_t count = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.labels()[i] != c) continue;
      sum += x.row(static_cast<Eigen::Index>(i)).transpose();
      ++count;
    }
    state.prior[c] = static_cast<double>(count) / n;
    if (count == 0) {
      state.mean[c] = Eigen::VectorXd::Zero(d);
      state.variance[c] = Eigen::VectorXd::Constant(d, 1.0);
      continue;
    }
    state.mean[c] = sum / static_cast<double>(count);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (train.labels()[i] != c) continue;
      sq += (x.row(static_cast<Eigen::Index>(i)).transpose() - state.mean[c]).array().square().matrix();
    }
    state.variance[c] = (sq / static_cast<double>(count)).array() + epsilon;
  }
  return state;
}

std::array<double, 2> gaussian_nb_posterior(const GaussianNbState& state,
                                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::array<double, 2> log_joint{};
  for (int c = 0; c < 2; ++c) {
    if (state.prior[c] <= 0.0) {
      log_joint[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    if (state.mean[c].size() != x.size()) {
      throw ValidationError("dimension mismatch: naive Bayes expects " +
                            std::to_string(state.mean[c].size()) + " features, got " +
                            std::to_string(x.size()));
    }
    const auto& var = state.variance[c].array();
    const double log_lik =
        -0.5 * ((2.0 * std::numbers::pi * var).log() + (x - state.mean[c]).array().square() / var).sum();
    log_joint[c] = std::log(state.prior[c]) + log_lik;
  }
  const double m = std::max(log_joint[0], log_joint[1]);
  const double e0 = std::exp(log_joint[0] - m);
  const double e1 = std::exp(log_joint[1] - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

GaussianNbModel::GaussianNbModel(ClassifierSpec spec, GaussianNbState state)
    : TrainedModel(std::move(spec), static_cast<std::size_t>(state.mean[0].size())),
      state_(std::move(state)) {}

std::unique_ptr<GaussianNbModel> GaussianNbModel::fit(const ClassifierSpec& spec,
                                                      const FeatureDataset& train) {
  const auto& p = std::get<GaussianNbParams>(spec.params);
  return std::make_unique<GaussianNbModel>(spec, fit_gaussian_nb(train, p.var_smoothing));
}

Eigen::VectorXd GaussianNbModel::score_rows(const FeatureMatrix& features) const {
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const Eigen::VectorXd x = features.row(i).transpose().cast<double>();
    out(i) = gaussian_nb_posterior(state_, x)[kDefect];
  }
  return out;
}

}  // namespace castguard
