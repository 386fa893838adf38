#include "castguard/classifiers/kernels.hpp"

#include <cmath>

#include "castguard/error.hpp"

namespace castguard {

double rbf_from_sq_distance(double sq_distance, double sigma, RbfForm form) {
  const double d = form == RbfForm::kSquared ? sq_distance : std::sqrt(sq_distance);
  return std::exp(-d / (2.0 * sigma * sigma));
}

double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double sigma, RbfForm form) {
  if (x.size() != y.size()) {
    throw ValidationError("rbf_kernel dimension mismatch: " + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()));
  }
  if (!(sigma > 0.0)) throw ValidationError("rbf_kernel sigma must be positive");
  return rbf_from_sq_distance((x - y).squaredNorm(), sigma, form);
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw ValidationError("squared_distances dimension mismatch");
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * a * b.transpose();
  d.colwise() += an;
  d.rowwise() += bn.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma,
                           RbfForm form) {
  if (!(sigma > 0.0)) throw ValidationError("rbf sigma must be positive");
  return squared_distances(a, b).unaryExpr(
      [sigma, form](double sq) { return rbf_from_sq_distance(sq, sigma, form); });
}

}  // namespace castguard
