#pragma once

#include <Eigen/Core>

#include "castguard/dataset.hpp"

namespace castguard {

/// Per-feature z-scoring with statistics taken from training data.
/// Constant features keep scale 1 so they map to 0 instead of dividing by zero.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd inv_std;

  static Standardizer fit(const FeatureMatrix& features);
  static Standardizer identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  Eigen::MatrixXd apply(const FeatureMatrix& features) const;
};

}  // namespace castguard
