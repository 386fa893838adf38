#include "castguard/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {
namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Eigen::VectorXd leading_variances(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& centered,
                                  std::size_t q) {
  const Eigen::MatrixXd b = basis.transpose() * centered;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues();
  return sv.head(static_cast<Eigen::Index>(q)).array().square() / static_cast<double>(centered.rows() - 1);
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t q, const PcaOptions& options) {
  const auto n = static_cast<std::size_t>(data.rows());
  const auto p = static_cast<std::size_t>(data.cols());
  if (n < 2) throw ValidationError("PCA needs at least 2 samples");
  if (q == 0 || q > std::min(n - 1, p)) {
    throw ValidationError("PCA q = " + std::to_string(q) + " must lie in [1, min(n - 1, p)] = [1, " +
                          std::to_string(std::min(n - 1, p)) + "]");
  }
  if (!data.allFinite()) throw ValidationError("PCA input contains non-finite values");

  PcaModel model;
  model.n_samples = n;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  model.total_variance = centered.squaredNorm() / static_cast<double>(n - 1);
  if (!(model.total_variance > 0.0)) throw ValidationError("PCA input has zero total variance");

  const std::size_t k = std::min(q + options.oversample, std::min(n, p));
  Rng rng = make_rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd omega(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);
  }

  Eigen::MatrixXd basis = orthonormal_basis(centered * omega);  // n x k
  Eigen::VectorXd previous = leading_variances(basis, centered, q);
  for (std::size_t it = 0; it < options.max_iters; ++it) {
    basis = orthonormal_basis(centered * orthonormal_basis(centered.transpose() * basis));
    const Eigen::VectorXd current = leading_variances(basis, centered, q);
    const double change = ((current - previous).array().abs() / current.array().max(1e-300)).maxCoeff();
    previous = current;
    if (change < options.tol) break;
  }

  // Right singular vectors of Q^T A are the left singular vectors of A^T Q.
  const Eigen::MatrixXd bt = centered.transpose() * basis;  // p x k
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(bt, Eigen::ComputeThinU);
  Eigen::MatrixXd directions = svd.matrixU().leftCols(static_cast<Eigen::Index>(q));  // p x q

  Eigen::VectorXd variances(static_cast<Eigen::Index>(q));
  for (Eigen::Index j = 0; j < variances.size(); ++j) {
    variances(j) = (centered * directions.col(j)).squaredNorm() / static_cast<double>(n - 1);
  }
  std::vector<Eigen::Index> order(q);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return variances(a) > variances(b); });

  model.components.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p));
  model.explained_variance.resize(static_cast<Eigen::Index>(q));
  for (std::size_t r = 0; r < q; ++r) {
    Eigen::VectorXd v = directions.col(order[r]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    model.components.row(static_cast<Eigen::Index>(r)) = v.transpose();
    model.explained_variance(static_cast<Eigen::Index>(r)) = variances(order[r]);
  }
  return model;
}

PcaModel pca_fit(const FeatureMatrix& data, std::size_t q, const PcaOptions& options) {
  return pca_fit(Eigen::MatrixXd(data.cast<double>()), q, options);
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (static_cast<std::size_t>(data.cols()) != model.p()) {
    throw ValidationError("dimension mismatch: PCA expects " + std::to_string(model.p()) +
                          " features, got " + std::to_string(data.cols()));
  }
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const FeatureMatrix& data) {
  return pca_transform(model, Eigen::MatrixXd(data.cast<double>()));
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& coordinates) {
  if (static_cast<std::size_t>(coordinates.cols()) != model.q()) {
    throw ValidationError("PCA reconstruction expects " + std::to_string(model.q()) + " coordinates per row");
  }
  return (coordinates * model.components).rowwise() + model.mean.transpose();
}

}  // namespace castguard
