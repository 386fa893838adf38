#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "castguard/error.hpp"
#include "castguard/pca.hpp"

namespace castguard {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  return x;
}

TEST(Pca, LineInThreeDimensions) {
  const Eigen::Vector3d dir = Eigen::Vector3d(1, 2, 2) / 3.0;
  const Eigen::MatrixXd t = gaussian(60, 1, 1);
  Eigen::MatrixXd x = t * dir.transpose();
  x.rowwise() += Eigen::RowVector3d(4, -1, 0.5);
  const PcaModel m = pca_fit(x, 1);
  EXPECT_GT(std::abs(m.components.row(0).dot(dir)), 1 - 1e-6);
  EXPECT_NEAR(m.explained_variance_ratio()(0), 1.0, 1e-9);
}

TEST(Pca, IsotropicCloudSpreadsVarianceEvenly) {
  const PcaModel m = pca_fit(gaussian(2000, 10, 2), 2);
  const Eigen::VectorXd r = m.explained_variance_ratio();
  EXPECT_NEAR(r(0), 0.1, 0.05);
  EXPECT_NEAR(r(1), 0.1, 0.05);
  EXPECT_GE(r(0), r(1));
}

TEST(Pca, MatchesFullEigendecomposition) {
  Eigen::MatrixXd x = gaussian(300, 15, 3);
  for (Eigen::Index c = 0; c < 15; ++c) x.col(c) *= 1.0 + 0.5 * c;
  const PcaModel m = pca_fit(x, 4);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 299.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(m.explained_variance(k), eig.eigenvalues()(14 - k), 1e-8 * eig.eigenvalues()(14));
    EXPECT_GT(std::abs(m.components.row(k).dot(eig.eigenvectors().col(14 - k))), 1 - 1e-8);
  }
  EXPECT_NEAR(m.total_variance, cov.trace(), 1e-9 * cov.trace());
  const Eigen::MatrixXd gram = m.components * m.components.transpose();
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  // Sign convention: the largest-magnitude entry of each component is positive.
  for (int k = 0; k < 4; ++k) {
    Eigen::Index arg;
    m.components.row(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.components(k, arg), 0.0);
  }
}

TEST(Pca, TransformCentersAndReconstructionIdentity) {
  const Eigen::MatrixXd x = gaussian(200, 8, 4) * 2.0;
  const PcaModel m = pca_fit(x, 3);
  const Eigen::MatrixXd z = pca_transform(m, x);
  EXPECT_LT(z.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(pca_transform(m, Eigen::MatrixXd(m.mean.transpose())).cwiseAbs().maxCoeff(), 1e-12);
  const double residual = (x - pca_reconstruct(m, z)).squaredNorm() / 199.0;
  const double expected = m.total_variance - m.explained_variance.sum();
  EXPECT_NEAR(residual, expected, 1e-6 * expected);
}

TEST(Pca, FullRankPreservesDistances) {
  const Eigen::MatrixXd x = gaussian(50, 6, 5);
  const PcaModel m = pca_fit(x, 6);
  const Eigen::MatrixXd z = pca_transform(m, x);
  for (int i = 0; i < 10; ++i) {
    const double d = (x.row(i) - x.row(i + 20)).norm();
    EXPECT_NEAR((z.row(i) - z.row(i + 20)).norm(), d, 1e-6 * d);
  }
}

TEST(Pca, SeedDeterminismAndErrors) {
  const Eigen::MatrixXd x = gaussian(100, 30, 6);
  EXPECT_EQ(pca_fit(x, 3).components, pca_fit(x, 3).components);
  EXPECT_THROW(pca_fit(x, 31), ValidationError);
  EXPECT_THROW(pca_fit(x, 0), ValidationError);
  EXPECT_THROW(pca_fit(Eigen::MatrixXd(Eigen::MatrixXd::Ones(10, 3)), 1), Error);
  const PcaModel m = pca_fit(x, 2);
  EXPECT_THROW(pca_transform(m, Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 5))), ValidationError);
}

}  // namespace
}  // namespace castguard
