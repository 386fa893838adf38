#include <algorithm>
#include <cmath>
#include <numeric>

#include "castguard/classifiers/svm.hpp"
#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {

LinearSvmSolution linear_svm_train(const Eigen::MatrixXd& inputs, const Labels& labels,
                                   double reg_c, std::size_t epochs, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  if (n != labels.size()) throw ValidationError("linear SVM inputs and labels differ in length");
  if (!(reg_c > 0.0)) throw ValidationError("linear SVM reg_c must be positive");
  if (epochs == 0) throw ValidationError("linear SVM epochs must be positive");
  require_both_classes(labels, "linear_svm");

  const Eigen::Index d = inputs.cols();
  const double lambda = 1.0 / (reg_c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  // w = scale * v over the augmented input [x, 1]. Shrinking w only touches
  // scale, so each step costs O(d) only when the sample violates the margin.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 1);
  double scale = 1.0;
  double v_sq = 0.0;

  Rng rng = make_rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t t = 0;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order) {
      ++t;
      const auto row = inputs.row(static_cast<Eigen::Index>(i));
      const double y = labels[i] == kDefect ? 1.0 : -1.0;
      const double vx = v.head(d).dot(row.transpose()) + v(d);
      const double margin = y * scale * vx;
      const double eta = 1.0 / (lambda * static_cast<double>(t));

      const double shrink = 1.0 - 1.0 / static_cast<double>(t);
      if (shrink == 0.0) {
        v.setZero();
        v_sq = 0.0;
        scale = 1.0;
      } else {
        scale *= shrink;
      }

      if (margin < 1.0) {
        const double c = eta * y / scale;
        const double x_sq = row.squaredNorm() + 1.0;
        const double vx_now = shrink == 0.0 ? 0.0 : vx;
        v.head(d) += c * row.transpose();
        v(d) += c;
        v_sq += 2.0 * c * vx_now + c * c * x_sq;
      }

      const double w_norm = scale * std::sqrt(std::max(v_sq, 0.0));
      if (w_norm > radius) scale *= radius / w_norm;

      if (scale < 1e-9) {
        v *= scale;
        scale = 1.0;
        v_sq = v.squaredNorm();
      }
    }
  }

  LinearSvmSolution out;
  out.weights = scale * v.head(d);
  out.bias = scale * v(d);
  return out;
}

LinearSvmSolution linear_svm_train(const FeatureDataset& train, double reg_c, std::size_t epochs,
                                   std::uint64_t seed) {
  return linear_svm_train(train.features().cast<double>(), train.labels(), reg_c, epochs, seed);
}

double mean_hinge_loss(const LinearSvmSolution& svm, const Eigen::MatrixXd& inputs,
                       const Labels& labels) {
  if (inputs.rows() == 0) return 0.0;
  const Eigen::VectorXd f = (inputs * svm.weights).array() + svm.bias;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double y = labels[static_cast<std::size_t>(i)] == kDefect ? 1.0 : -1.0;
    sum += std::max(0.0, 1.0 - y * f(i));
  }
  return sum / static_cast<double>(f.size());
}

LinearSvmModel::LinearSvmModel(ClassifierSpec spec, Standardizer standardizer,
                               LinearSvmSolution solution)
    : TrainedModel(std::move(spec), standardizer.dim()),
      standardizer_(std::move(standardizer)),
      solution_(std::move(solution)) {}

std::unique_ptr<LinearSvmModel> LinearSvmModel::fit(const ClassifierSpec& spec,
                                                    const FeatureDataset& train) {
  require_both_classes(train.labels(), "linear_svm");
  const auto& p = std::get<LinearSvmParams>(spec.params);
  Standardizer standardizer = Standardizer::fit(train.features());
  LinearSvmSolution sol =
      linear_svm_train(standardizer.apply(train.features()), train.labels(), p.reg_c, p.epochs, spec.seed);
  return std::make_unique<LinearSvmModel>(spec, std::move(standardizer), std::move(sol));
}

Eigen::VectorXd LinearSvmModel::score_rows(const FeatureMatrix& features) const {
  return (standardizer_.apply(features) * solution_.weights).array() + solution_.bias;
}

}  // namespace castguard
