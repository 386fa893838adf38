#pragma once

#include <Eigen/Core>

#include "castguard/classifiers/classifier.hpp"

namespace castguard {

/// RBF kernel. The squared form is the usual exp(-|x-y|^2 / (2 sigma^2));
/// kLiteral drops the square on the norm.
double rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double sigma,
                  RbfForm form = RbfForm::kSquared);

/// Kernel value from a precomputed squared distance.
double rbf_from_sq_distance(double sq_distance, double sigma, RbfForm form);

/// Pairwise squared Euclidean distances between rows of a and rows of b.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// K(i, j) = rbf(a_i, b_j).
Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma,
                           RbfForm form = RbfForm::kSquared);

}  // namespace castguard
