#include "castguard/classifiers/gaussian_process.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "castguard/classifiers/kernels.hpp"
#include "castguard/error.hpp"

namespace castguard {
namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& inputs, const GpConfig& config) {
  Eigen::MatrixXd k = rbf_matrix(inputs, inputs, config.length_scale, config.kernel_form);
  k.diagonal().array() = 1.0 + config.jitter;
  return k;
}

// log p(y | f) for targets in {0, 1}: sum log sigmoid(+-f).
double log_likelihood(const Eigen::VectorXd& targets, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += log_sigmoid(targets(i) > 0.5 ? f(i) : -f(i));
  return s;
}

Eigen::VectorXd likelihood_gradient(const Eigen::VectorXd& targets, const Eigen::VectorXd& f) {
  return targets - f.unaryExpr([](double z) { return sigmoid(z); });
}

struct NewtonSystem {
  Eigen::VectorXd sqrt_w;
  Eigen::VectorXd grad;
  Eigen::LLT<Eigen::MatrixXd> llt;
};

NewtonSystem factorize(const Eigen::MatrixXd& k, const Eigen::VectorXd& targets,
                       const Eigen::VectorXd& f) {
  NewtonSystem sys;
  const Eigen::VectorXd pi = f.unaryExpr([](double z) { return sigmoid(z); });
  sys.sqrt_w = (pi.array() * (1.0 - pi.array())).sqrt().matrix();
  sys.grad = targets - pi;
  Eigen::MatrixXd b = sys.sqrt_w.asDiagonal() * k * sys.sqrt_w.asDiagonal();
  b.diagonal().array() += 1.0;
  sys.llt.compute(b);
  if (sys.llt.info() != Eigen::Success) {
    throw TrainingError("GP Laplace: Cholesky factorization of I + W^1/2 K W^1/2 failed");
  }
  return sys;
}

}  // namespace

GpPosterior gp_laplace_fit(const Eigen::MatrixXd& inputs, const Labels& labels,
                           const GpConfig& config) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  if (n == 0) throw ValidationError("GP training set is empty");
  if (n != labels.size()) throw ValidationError("GP inputs and labels differ in length");
  if (n > config.max_samples) {
    throw ValidationError("GP training set of " + std::to_string(n) + " samples exceeds the " +
                          std::to_string(config.max_samples) + "-sample kernel matrix limit");
  }

  GpPosterior post;
  post.config = config;
  post.inputs = inputs;
  post.targets.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) post.targets(static_cast<Eigen::Index>(i)) = labels[i];

  const Eigen::MatrixXd k = gram(inputs, config);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  auto objective = [&](const Eigen::VectorXd& a_, const Eigen::VectorXd& f_) {
    return -0.5 * a_.dot(f_) + log_likelihood(post.targets, f_);
  };
  double psi = objective(a, f);
  double grad_norm = (likelihood_gradient(post.targets, f) - a).norm();

  std::size_t iter = 0;
  while (grad_norm > config.newton_tol) {
    if (iter == config.max_newton_iters) {
      throw TrainingError("GP Laplace: Newton did not converge in " + std::to_string(iter) +
                          " iterations (gradient norm " + std::to_string(grad_norm) + ")");
    }
    ++iter;
    const NewtonSystem sys = factorize(k, post.targets, f);
    const Eigen::VectorXd w = sys.sqrt_w.array().square().matrix();
    const Eigen::VectorXd b = w.cwiseProduct(f) + sys.grad;
    const Eigen::VectorXd rhs = sys.sqrt_w.cwiseProduct(k * b);
    const Eigen::VectorXd a_full =
        b - sys.sqrt_w.cwiseProduct(sys.llt.matrixU().solve(sys.llt.matrixL().solve(rhs)));

    // Damped step on the concave objective; the full step almost always wins.
    Eigen::VectorXd a_next = a_full;
    Eigen::VectorXd f_next = k * a_next;
    double psi_next = objective(a_next, f_next);
    for (int halvings = 0; psi_next < psi && halvings < 20; ++halvings) {
      a_next = 0.5 * (a + a_next);
      f_next = k * a_next;
      psi_next = objective(a_next, f_next);
    }
    a = std::move(a_next);
    f = std::move(f_next);
    psi = psi_next;
    grad_norm = (likelihood_gradient(post.targets, f) - a).norm();
  }

  post.latent_mode = f;
  post.iterations = iter;
  post.gradient_norm = grad_norm;
  gp_refresh_factorization(post);
  return post;
}

GpPosterior gp_laplace_fit(const FeatureDataset& train, const GpConfig& config) {
  return gp_laplace_fit(train.features().cast<double>(), train.labels(), config);
}

void gp_refresh_factorization(GpPosterior& post) {
  const Eigen::MatrixXd k = gram(post.inputs, post.config);
  const NewtonSystem sys = factorize(k, post.targets, post.latent_mode);
  post.sqrt_w = sys.sqrt_w;
  post.grad_log_lik = sys.grad;
  post.chol_b = sys.llt.matrixL();
}

Eigen::VectorXd gp_predict_proba(const GpPosterior& post, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != post.inputs.cols()) {
    throw ValidationError("dimension mismatch: GP expects " + std::to_string(post.inputs.cols()) +
                          " features, got " + std::to_string(inputs.cols()));
  }
  // k_star: n_train x m
  const Eigen::MatrixXd k_star =
      rbf_matrix(post.inputs, inputs, post.config.length_scale, post.config.kernel_form);
  const Eigen::VectorXd mean = k_star.transpose() * post.grad_log_lik;
  const Eigen::MatrixXd v =
      post.chol_b.triangularView<Eigen::Lower>().solve(post.sqrt_w.asDiagonal() * k_star);
  const Eigen::VectorXd var = (1.0 - v.colwise().squaredNorm().array()).cwiseMax(0.0).matrix();

  Eigen::VectorXd out(inputs.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = sigmoid(mean(i) / std::sqrt(1.0 + std::numbers::pi * var(i) / 8.0));
  }
  return out;
}

double gp_predict_point(const GpPosterior& post, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::MatrixXd row = x.transpose();
  return gp_predict_proba(post, row)(0);
}

GaussianProcessModel::GaussianProcessModel(ClassifierSpec spec, Standardizer standardizer,
                                           GpPosterior posterior)
    : TrainedModel(std::move(spec), standardizer.dim()),
      standardizer_(std::move(standardizer)),
      posterior_(std::move(posterior)) {}

std::unique_ptr<GaussianProcessModel> GaussianProcessModel::fit(const ClassifierSpec& spec,
                                                                const FeatureDataset& train) {
  require_both_classes(train.labels(), "gaussian_process");
  Standardizer standardizer = Standardizer::fit(train.features());
  GpPosterior post =
      gp_laplace_fit(standardizer.apply(train.features()), train.labels(), std::get<GpConfig>(spec.params));
  return std::make_unique<GaussianProcessModel>(spec, std::move(standardizer), std::move(post));
}

Eigen::VectorXd GaussianProcessModel::score_rows(const FeatureMatrix& features) const {
  return gp_predict_proba(posterior_, standardizer_.apply(features));
}

}  // namespace castguard
