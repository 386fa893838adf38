#include <algorithm>
#include <cmath>
#include <numeric>

#include "castguard/classifiers/kernels.hpp"
#include "castguard/classifiers/svm.hpp"
#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {

double median_pairwise_distance(const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = inputs.rows();
  if (n < 2) throw ValidationError("median pairwise distance needs at least 2 rows");
  const Eigen::MatrixXd sq = squared_distances(inputs, inputs);
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) dist.push_back(std::sqrt(sq(i, j)));
  }
  const std::size_t m = dist.size();
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(m / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  if (m % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(dist.begin(), mid);
  return 0.5 * (lower + upper);
}

RbfSvmSolution rbf_svm_train(const Eigen::MatrixXd& inputs, const Labels& labels,
                             const RbfSvmParams& params, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  if (n != labels.size()) throw ValidationError("RBF SVM inputs and labels differ in length");
  if (!(params.reg_c > 0.0)) throw ValidationError("RBF SVM reg_c must be positive");
  if (params.sigma < 0.0) throw ValidationError("RBF SVM sigma must be positive (0 = median)");
  require_both_classes(labels, "rbf_svm");

  RbfSvmSolution sol;
  sol.kernel_form = params.kernel_form;
  sol.sigma = params.sigma > 0.0 ? params.sigma : median_pairwise_distance(inputs);
  if (!(sol.sigma > 0.0)) {
    throw TrainingError("RBF SVM: median pairwise distance is 0 (all rows identical)");
  }

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = labels[i] == kDefect ? 1.0 : -1.0;
  Eigen::MatrixXd q = rbf_matrix(inputs, inputs, sol.sigma, sol.kernel_form);
  q.diagonal().setOnes();
  q.array() += 1.0;
  q = y.asDiagonal() * q * y.asDiagonal();

  const double c = params.reg_c;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), -1.0);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_rng(seed);

  for (sol.passes = 0; sol.passes < params.max_passes;) {
    std::shuffle(order.begin(), order.end(), rng);
    ++sol.passes;
    double max_pg = 0.0;
    for (const Eigen::Index i : order) {
      const double g = grad(i);
      double pg = g;
      if (alpha(i) <= 0.0) pg = std::min(g, 0.0);
      else if (alpha(i) >= c) pg = std::max(g, 0.0);
      max_pg = std::max(max_pg, std::abs(pg));
      if (pg == 0.0) continue;
      const double next = std::clamp(alpha(i) - g / q(i, i), 0.0, c);
      const double delta = next - alpha(i);
      if (delta == 0.0) continue;
      alpha(i) = next;
      grad += delta * q.col(i);
    }
    if (max_pg < params.tolerance) {
      sol.converged = true;
      break;
    }
  }

  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) > 0.0) support.push_back(i);
  }
  sol.support.resize(static_cast<Eigen::Index>(support.size()), inputs.cols());
  sol.coef.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    sol.support.row(row) = inputs.row(support[s]);
    sol.coef(row) = alpha(support[s]) * y(support[s]);
  }
  return sol;
}

Eigen::VectorXd rbf_svm_decision(const RbfSvmSolution& svm, const Eigen::MatrixXd& inputs) {
  if (svm.support.rows() == 0) return Eigen::VectorXd::Zero(inputs.rows());
  if (inputs.cols() != svm.support.cols()) {
    throw ValidationError("dimension mismatch: RBF SVM expects " + std::to_string(svm.support.cols()) +
                          " features, got " + std::to_string(inputs.cols()));
  }
  Eigen::MatrixXd k = rbf_matrix(inputs, svm.support, svm.sigma, svm.kernel_form);
  k.array() += 1.0;
  return k * svm.coef;
}

RbfSvmModel::RbfSvmModel(ClassifierSpec spec, Standardizer standardizer, RbfSvmSolution solution)
    : TrainedModel(std::move(spec), standardizer.dim()),
      standardizer_(std::move(standardizer)),
      solution_(std::move(solution)) {}

std::unique_ptr<RbfSvmModel> RbfSvmModel::fit(const ClassifierSpec& spec, const FeatureDataset& train) {
  require_both_classes(train.labels(), "rbf_svm");
  Standardizer standardizer = Standardizer::fit(train.features());
  RbfSvmSolution sol = rbf_svm_train(standardizer.apply(train.features()), train.labels(),
                                     std::get<RbfSvmParams>(spec.params), spec.seed);
  return std::make_unique<RbfSvmModel>(spec, std::move(standardizer), std::move(sol));
}

Eigen::VectorXd RbfSvmModel::score_rows(const FeatureMatrix& features) const {
  return rbf_svm_decision(solution_, standardizer_.apply(features));
}

}  // namespace castguard
