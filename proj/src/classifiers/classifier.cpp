#include <cmath>
#include <string>

#include "castguard/classifiers.hpp"
#include "castguard/error.hpp"

namespace castguard {
namespace {

struct KindInfo {
  ClassifierKind kind;
  std::string_view id;
  std::string_view display;
};

constexpr KindInfo kKinds[] = {
    {ClassifierKind::kKnn, "knn", "Nearest Neighbors"},
    {ClassifierKind::kGaussianNb, "gaussian_nb", "Naive Bayes"},
    {ClassifierKind::kGaussianProcess, "gaussian_process", "Gaussian Process"},
    {ClassifierKind::kLinearSvm, "linear_svm", "Linear SVM"},
    {ClassifierKind::kRbfSvm, "rbf_svm", "RBF SVM"},
    {ClassifierKind::kRandomForest, "random_forest", "Random Forest"},
    {ClassifierKind::kAdaBoost, "adaboost", "AdaBoost"},
    {ClassifierKind::kMlp, "mlp", "Neural Network"},
};

const KindInfo& info(ClassifierKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw ValidationError("unknown classifier kind " + std::to_string(static_cast<int>(kind)));
}

void require_positive(double v, std::string_view what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(what) + " must be a finite positive number");
  }
}

}  // namespace

std::string_view to_string(ClassifierKind kind) { return info(kind).id; }
std::string_view display_name(ClassifierKind kind) { return info(kind).display; }

ClassifierKind parse_classifier_kind(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.id == name) return k.kind;
  }
  std::string known;
  for (const auto& k : kKinds) known += (known.empty() ? "" : ", ") + std::string(k.id);
  throw ValidationError("unknown classifier \"" + std::string(name) + "\" (known: " + known + ")");
}

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind, std::uint64_t seed) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case ClassifierKind::kKnn: spec.params = KnnParams{}; break;
    case ClassifierKind::kGaussianNb: spec.params = GaussianNbParams{}; break;
    case ClassifierKind::kGaussianProcess: spec.params = GpConfig{}; break;
    case ClassifierKind::kLinearSvm: spec.params = LinearSvmParams{}; break;
    case ClassifierKind::kRbfSvm: spec.params = RbfSvmParams{}; break;
    case ClassifierKind::kRandomForest: spec.params = ForestParams{}; break;
    case ClassifierKind::kAdaBoost: spec.params = AdaBoostParams{}; break;
    case ClassifierKind::kMlp: spec.params = MlpParams{}; break;
  }
  return spec;
}

void ClassifierSpec::validate() const {
  if (params.index() != static_cast<std::size_t>(kind)) {
    throw ValidationError("hyperparameters do not match classifier kind " + std::string(to_string(kind)));
  }
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          if (p.k == 0) throw ValidationError("knn k must be positive");
        } else if constexpr (std::is_same_v<P, GaussianNbParams>) {
          require_positive(p.var_smoothing, "var_smoothing");
        } else if constexpr (std::is_same_v<P, GpConfig>) {
          require_positive(p.length_scale, "GP length_scale");
          require_positive(p.jitter, "GP jitter");
          require_positive(p.newton_tol, "GP newton_tol");
          if (p.max_newton_iters == 0) throw ValidationError("GP max_newton_iters must be positive");
        } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
          require_positive(p.reg_c, "linear SVM reg_c");
          if (p.epochs == 0) throw ValidationError("linear SVM epochs must be positive");
        } else if constexpr (std::is_same_v<P, RbfSvmParams>) {
          require_positive(p.reg_c, "RBF SVM reg_c");
          if (p.sigma < 0.0 || !std::isfinite(p.sigma)) throw ValidationError("RBF SVM sigma must be >= 0");
          require_positive(p.tolerance, "RBF SVM tolerance");
          if (p.max_passes == 0) throw ValidationError("RBF SVM max_passes must be positive");
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          if (p.n_trees == 0) throw ValidationError("random forest needs at least one tree");
          if (p.min_leaf == 0) throw ValidationError("random forest min_leaf must be positive");
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          if (p.n_rounds == 0) throw ValidationError("AdaBoost n_rounds must be positive");
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          if (p.hidden_sizes.empty()) throw ValidationError("MLP needs at least one hidden layer");
          for (auto h : p.hidden_sizes) {
            if (h == 0) throw ValidationError("MLP hidden sizes must be positive");
          }
          p.train.validate();
        }
      },
      params);
}

void require_both_classes(const Labels& labels, std::string_view who) {
  bool seen[2] = {false, false};
  for (auto y : labels) seen[y & 1] = true;
  if (!seen[0] || !seen[1]) {
    throw TrainingError("degenerate training set: " + std::string(who) + " needs both classes present");
  }
}

Eigen::VectorXd TrainedModel::score(const FeatureMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != feature_dim_) {
    throw ValidationError("dimension mismatch: model expects " + std::to_string(feature_dim_) +
                          " features, got " + std::to_string(features.cols()));
  }
  return score_rows(features);
}

Labels TrainedModel::predict(const FeatureMatrix& features) const {
  const Eigen::VectorXd s = score(features);
  Labels out(static_cast<std::size_t>(s.size()));
  const double cut = decision_point();
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) >= cut ? kDefect : kNonDefect;
  return out;
}

std::unique_ptr<TrainedModel> fit(const ClassifierSpec& spec, const FeatureDataset& train) {
  spec.validate();
  if (train.size() == 0) throw ValidationError("training set is empty");
  switch (spec.kind) {
    case ClassifierKind::kKnn: return KnnModel::fit(spec, train);
    case ClassifierKind::kGaussianNb: return GaussianNbModel::fit(spec, train);
    case ClassifierKind::kGaussianProcess: return GaussianProcessModel::fit(spec, train);
    case ClassifierKind::kLinearSvm: return LinearSvmModel::fit(spec, train);
    case ClassifierKind::kRbfSvm: return RbfSvmModel::fit(spec, train);
    case ClassifierKind::kRandomForest: return RandomForestModel::fit(spec, train);
    case ClassifierKind::kAdaBoost: return AdaBoostModel::fit(spec, train);
    case ClassifierKind::kMlp: return MlpClassifierModel::fit(spec, train);
  }
  throw ValidationError("unknown classifier kind");
}

}  // namespace castguard
