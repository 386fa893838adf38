#include "castguard/standardize.hpp"

#include <cmath>

#include "castguard/error.hpp"

namespace castguard {

Standardizer Standardizer::fit(const FeatureMatrix& features) {
  if (features.rows() == 0) throw ValidationError("cannot standardize an empty matrix");
  const Eigen::Index d = features.cols();
  const double n = static_cast<double>(features.rows());
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    s.mean += features.row(r).transpose().cast<double>();
  }
  s.mean /= n;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    sq += (features.row(r).transpose().cast<double>() - s.mean).array().square().matrix();
  }
  s.inv_std.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt(sq(j) / n);
    s.inv_std(j) = sd > 0.0 ? 1.0 / sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Standardizer{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

Eigen::MatrixXd Standardizer::apply(const FeatureMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != dim()) {
    throw ValidationError("standardizer expects " + std::to_string(dim()) + " features, got " +
                          std::to_string(features.cols()));
  }
  Eigen::MatrixXd out = features.cast<double>();
  out.rowwise() -= mean.transpose();
  out.array().rowwise() *= inv_std.transpose().array();
  return out;
}

}  // namespace castguard
