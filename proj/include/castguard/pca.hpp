#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "castguard/dataset.hpp"

namespace castguard {

struct PcaOptions {
  std::size_t oversample = 10;
  std::size_t max_iters = 50;
  double tol = 1e-12;  // relative change of the leading variances
  std::uint64_t seed = 0;
};

/// Top-q principal directions. Each component's largest-magnitude coordinate
/// is positive, so fits are reproducible.
struct PcaModel {
  Eigen::VectorXd mean;                // p
  Eigen::MatrixXd components;          // q x p, orthonormal rows
  Eigen::VectorXd explained_variance;  // q, non-increasing, n - 1 denominator
  double total_variance = 0.0;
  std::size_t n_samples = 0;

  std::size_t q() const noexcept { return static_cast<std::size_t>(components.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(components.cols()); }
  Eigen::VectorXd explained_variance_ratio() const { return explained_variance / total_variance; }
};

/// Randomized subspace iteration on the centered data; never forms the
/// p x p covariance. Requires q <= min(n - 1, p) and nonzero total variance.
PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t q, const PcaOptions& options = {});
PcaModel pca_fit(const FeatureMatrix& data, std::size_t q, const PcaOptions& options = {});

/// (data - mean) * components^T, n x q.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data);
Eigen::MatrixXd pca_transform(const PcaModel& model, const FeatureMatrix& data);

/// coordinates * components + mean, n x p.
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& coordinates);

}  // namespace castguard
