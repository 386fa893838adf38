#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "castguard/dataset.hpp"
#include "castguard/mlp.hpp"

namespace castguard {

enum class ClassifierKind : std::uint8_t {
  kKnn = 0,
  kGaussianNb = 1,
  kGaussianProcess = 2,
  kLinearSvm = 3,
  kRbfSvm = 4,
  kRandomForest = 5,
  kAdaBoost = 6,
  kMlp = 7,
};

inline constexpr std::array<ClassifierKind, 8> kAllClassifierKinds = {
    ClassifierKind::kKnn,       ClassifierKind::kGaussianNb,   ClassifierKind::kGaussianProcess,
    ClassifierKind::kLinearSvm, ClassifierKind::kRbfSvm,       ClassifierKind::kRandomForest,
    ClassifierKind::kAdaBoost,  ClassifierKind::kMlp};

/// Stable identifiers used on the command line and in reports, e.g. "linear_svm".
std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view name);
/// Human-readable row label for report tables, e.g. "Linear SVM".
std::string_view display_name(ClassifierKind kind);

enum class RbfForm : std::uint8_t {
  kSquared = 0,  // exp(-|x-y|^2 / 2 sigma^2)
  kLiteral = 1,  // exp(-|x-y| / 2 sigma^2)
};

struct KnnParams {
  std::size_t k = 2;
};

struct GaussianNbParams {
  double var_smoothing = 1e-9;
};

struct GpConfig {
  double length_scale = 1.0;
  double jitter = 1e-6;
  std::size_t max_newton_iters = 100;
  double newton_tol = 1e-6;
  std::size_t max_samples = 5000;
  RbfForm kernel_form = RbfForm::kSquared;
};

struct LinearSvmParams {
  double reg_c = 1.0;
  std::size_t epochs = 200;
};

struct RbfSvmParams {
  double reg_c = 1.0;
  double sigma = 0.0;  // 0 selects the median pairwise distance
  RbfForm kernel_form = RbfForm::kSquared;
  std::size_t max_passes = 1000;
  double tolerance = 1e-3;
};

struct ForestParams {
  std::size_t n_trees = 10;
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0 selects ceil(sqrt(d))
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;     // 0 = unlimited
};

struct AdaBoostParams {
  std::size_t n_rounds = 50;
};

struct MlpParams {
  std::vector<std::size_t> hidden_sizes{256, 128};
  Activation activation = Activation::kRelu;
  TrainConfig train;
};

using Hyperparameters = std::variant<KnnParams, GaussianNbParams, GpConfig, LinearSvmParams,
                                     RbfSvmParams, ForestParams, AdaBoostParams, MlpParams>;

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kLinearSvm;
  Hyperparameters params = LinearSvmParams{};
  std::uint64_t seed = 0;

  /// Library defaults: k=2, GP length scale 1, 10 trees, 50 boosting rounds.
  static ClassifierSpec defaults(ClassifierKind kind, std::uint64_t seed = 0);
  void validate() const;
};

/// A fitted classifier. Scores are oriented so that larger means "more defect";
/// predict() returns 1 exactly when score >= decision_point().
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  const ClassifierSpec& spec() const noexcept { return spec_; }
  ClassifierKind kind() const noexcept { return spec_.kind; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  /// 0.5 for probability-valued scores, 0 for signed margins.
  virtual double decision_point() const noexcept = 0;

  Eigen::VectorXd score(const FeatureMatrix& features) const;
  Labels predict(const FeatureMatrix& features) const;

 protected:
  TrainedModel(ClassifierSpec spec, std::size_t feature_dim)
      : spec_(std::move(spec)), feature_dim_(feature_dim) {}

  virtual Eigen::VectorXd score_rows(const FeatureMatrix& features) const = 0;

 private:
  ClassifierSpec spec_;
  std::size_t feature_dim_;
};

/// Fits any classifier kind. Deterministic in (spec, train).
std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, const FeatureDataset& train);

/// Versioned binary blob: "CGM1", version byte, kind byte, seed, kind payload.
/// Layout is documented in docs/model-format.md.
void save_model(const TrainedModel& model, std::ostream& out);
std::unique_ptr<TrainedModel> load_model(std::istream& in);

// Shared validation used by every fit path.
void require_both_classes(const Labels& labels, std::string_view who);

}  // namespace castguard
