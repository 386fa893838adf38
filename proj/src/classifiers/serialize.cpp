#include <algorithm>
#include <istream>
#include <ostream>

#include "castguard/classifiers.hpp"
#include "castguard/error.hpp"
#include "model_codec.hpp"

namespace castguard {
namespace {

using detail::BinaryReader;
using detail::BinaryWriter;

constexpr char kMagic[4] = {'C', 'G', 'M', '1'};
constexpr std::uint8_t kVersion = 1;

void put_params(BinaryWriter& w, const Hyperparameters& params) {
  std::visit(
      [&w](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          w.put<std::uint64_t>(p.k);
        } else if constexpr (std::is_same_v<P, GaussianNbParams>) {
          w.put(p.var_smoothing);
        } else if constexpr (std::is_same_v<P, GpConfig>) {
          w.put(p.length_scale);
          w.put(p.jitter);
          w.put<std::uint64_t>(p.max_newton_iters);
          w.put(p.newton_tol);
          w.put<std::uint64_t>(p.max_samples);
          w.put(static_cast<std::uint8_t>(p.kernel_form));
        } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
          w.put(p.reg_c);
          w.put<std::uint64_t>(p.epochs);
        } else if constexpr (std::is_same_v<P, RbfSvmParams>) {
          w.put(p.reg_c);
          w.put(p.sigma);
          w.put(static_cast<std::uint8_t>(p.kernel_form));
          w.put<std::uint64_t>(p.max_passes);
          w.put(p.tolerance);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          w.put<std::uint64_t>(p.n_trees);
          w.put<std::uint8_t>(p.bootstrap ? 1 : 0);
          w.put<std::uint64_t>(p.max_features);
          w.put<std::uint64_t>(p.min_leaf);
          w.put<std::uint64_t>(p.max_depth);
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          w.put<std::uint64_t>(p.n_rounds);
        } else {
          detail::put_sizes(w, p.hidden_sizes);
          w.put(static_cast<std::uint8_t>(p.activation));
          detail::put_train_config(w, p.train);
        }
      },
      params);
}

Hyperparameters get_params(BinaryReader& r, ClassifierKind kind) {
  auto u64 = [&r] { return static_cast<std::size_t>(r.get<std::uint64_t>()); };
  switch (kind) {
    case ClassifierKind::kKnn:
      return KnnParams{u64()};
    case ClassifierKind::kGaussianNb:
      return GaussianNbParams{r.get<double>()};
    case ClassifierKind::kGaussianProcess: {
      GpConfig p;
      p.length_scale = r.get<double>();
      p.jitter = r.get<double>();
      p.max_newton_iters = u64();
      p.newton_tol = r.get<double>();
      p.max_samples = u64();
      p.kernel_form = static_cast<RbfForm>(r.get<std::uint8_t>());
      return p;
    }
    case ClassifierKind::kLinearSvm: {
      LinearSvmParams p;
      p.reg_c = r.get<double>();
      p.epochs = u64();
      return p;
    }
    case ClassifierKind::kRbfSvm: {
      RbfSvmParams p;
      p.reg_c = r.get<double>();
      p.sigma = r.get<double>();
      p.kernel_form = static_cast<RbfForm>(r.get<std::uint8_t>());
      p.max_passes = u64();
      p.tolerance = r.get<double>();
      return p;
    }
    case ClassifierKind::kRandomForest: {
      ForestParams p;
      p.n_trees = u64();
      p.bootstrap = r.get<std::uint8_t>() != 0;
      p.max_features = u64();
      p.min_leaf = u64();
      p.max_depth = u64();
      return p;
    }
    case ClassifierKind::kAdaBoost:
      return AdaBoostParams{u64()};
    case ClassifierKind::kMlp: {
      MlpParams p;
      p.hidden_sizes = detail::get_sizes(r);
      p.activation = static_cast<Activation>(r.get<std::uint8_t>());
      p.train = detail::get_train_config(r);
      return p;
    }
  }
  throw DataError("corrupt model: unknown classifier kind");
}

template <typename Model>
const Model& as(const TrainedModel& m) {
  const auto* p = dynamic_cast<const Model*>(&m);
  if (p == nullptr) throw ValidationError("model object does not match its declared kind");
  return *p;
}

void put_tree(BinaryWriter& w, const DecisionTree& tree) {
  w.put<std::uint64_t>(tree.nodes().size());
  for (const auto& n : tree.nodes()) {
    w.put(n.feature);
    w.put(n.threshold);
    w.put(n.left);
    w.put(n.right);
    w.put(n.label);
  }
}

DecisionTree get_tree(BinaryReader& r, std::size_t dim) {
  std::vector<TreeNode> nodes(detail::checked_count(r.get<std::uint64_t>()));
  const auto count = static_cast<std::int32_t>(nodes.size());
  for (auto& n : nodes) {
    n.feature = r.get<std::int32_t>();
    n.threshold = r.get<double>();
    n.left = r.get<std::int32_t>();
    n.right = r.get<std::int32_t>();
    n.label = r.get<std::uint8_t>();
    const bool bad_split = n.feature != TreeNode::kLeaf &&
                           (n.feature < 0 || static_cast<std::size_t>(n.feature) >= dim ||
                            n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count);
    if (bad_split || n.label > 1) throw DataError("corrupt model: invalid tree node");
  }
  if (nodes.empty()) throw DataError("corrupt model: empty tree");
  return DecisionTree(std::move(nodes));
}

void put_payload(BinaryWriter& w, const TrainedModel& model) {
  switch (model.kind()) {
    case ClassifierKind::kKnn: {
      const auto& m = as<KnnModel>(model);
      detail::put_matrix(w, m.train_features());
      detail::put_labels(w, m.train_labels());
      return;
    }
    case ClassifierKind::kGaussianNb: {
      const auto& s = as<GaussianNbModel>(model).state();
      for (int c = 0; c < 2; ++c) {
        w.put(s.prior[c]);
        detail::put_vector(w, s.mean[c]);
        detail::put_vector(w, s.variance[c]);
      }
      return;
    }
    case ClassifierKind::kGaussianProcess: {
      const auto& m = as<GaussianProcessModel>(model);
      const auto& p = m.posterior();
      detail::put_standardizer(w, m.standardizer());
      detail::put_matrix(w, p.inputs);
      detail::put_vector(w, p.targets);
      detail::put_vector(w, p.latent_mode);
      detail::put_vector(w, p.grad_log_lik);
      detail::put_vector(w, p.sqrt_w);
      detail::put_matrix(w, p.chol_b);
      w.put<std::uint64_t>(p.iterations);
      w.put(p.gradient_norm);
      return;
    }
    case ClassifierKind::kLinearSvm: {
      const auto& m = as<LinearSvmModel>(model);
      detail::put_standardizer(w, m.standardizer());
      detail::put_vector(w, m.solution().weights);
      w.put(m.solution().bias);
      return;
    }
    case ClassifierKind::kRbfSvm: {
      const auto& m = as<RbfSvmModel>(model);
      const auto& s = m.solution();
      detail::put_standardizer(w, m.standardizer());
      detail::put_matrix(w, s.support);
      detail::put_vector(w, s.coef);
      w.put(s.sigma);
      w.put(static_cast<std::uint8_t>(s.kernel_form));
      w.put<std::uint64_t>(s.passes);
      w.put<std::uint8_t>(s.converged ? 1 : 0);
      return;
    }
    case ClassifierKind::kRandomForest: {
      const auto& m = as<RandomForestModel>(model);
      w.put<std::uint64_t>(m.trees().size());
      for (const auto& t : m.trees()) put_tree(w, t);
      return;
    }
    case ClassifierKind::kAdaBoost: {
      const auto& m = as<AdaBoostModel>(model);
      w.put<std::uint64_t>(m.stumps().size());
      for (std::size_t i = 0; i < m.stumps().size(); ++i) {
        w.put<std::uint64_t>(m.stumps()[i].feature);
        w.put(m.stumps()[i].threshold);
        w.put<std::int8_t>(static_cast<std::int8_t>(m.stumps()[i].polarity));
        w.put(m.alphas()[i]);
      }
      return;
    }
    case ClassifierKind::kMlp: {
      const auto& m = as<MlpClassifierModel>(model);
      detail::put_standardizer(w, m.standardizer());
      detail::put_mlp(w, m.network());
      return;
    }
  }
}

void require_dim(bool ok) {
  if (!ok) throw DataError("corrupt model: inconsistent payload dimensions");
}

std::unique_ptr<TrainedModel> get_payload(BinaryReader& r, ClassifierSpec spec, std::size_t dim) {
  const auto idim = static_cast<Eigen::Index>(dim);
  switch (spec.kind) {
    case ClassifierKind::kKnn: {
      auto x = detail::get_matrix<FeatureMatrix>(r);
      auto y = detail::get_labels(r);
      require_dim(x.cols() == idim && static_cast<std::size_t>(x.rows()) == y.size());
      return std::make_unique<KnnModel>(std::move(spec), std::move(x), std::move(y));
    }
    case ClassifierKind::kGaussianNb: {
      GaussianNbState s;
      for (int c = 0; c < 2; ++c) {
        s.prior[c] = r.get<double>();
        s.mean[c] = detail::get_vector(r);
        s.variance[c] = detail::get_vector(r);
        require_dim(s.mean[c].size() == idim && s.variance[c].size() == idim);
      }
      return std::make_unique<GaussianNbModel>(std::move(spec), std::move(s));
    }
    case ClassifierKind::kGaussianProcess: {
      Standardizer st = detail::get_standardizer(r);
      GpPosterior p;
      p.config = std::get<GpConfig>(spec.params);
      p.inputs = detail::get_matrix<Eigen::MatrixXd>(r);
      p.targets = detail::get_vector(r);
      p.latent_mode = detail::get_vector(r);
      p.grad_log_lik = detail::get_vector(r);
      p.sqrt_w = detail::get_vector(r);
      p.chol_b = detail::get_matrix<Eigen::MatrixXd>(r);
      p.iterations = static_cast<std::size_t>(r.get<std::uint64_t>());
      p.gradient_norm = r.get<double>();
      const auto n = p.inputs.rows();
      require_dim(st.mean.size() == idim && p.inputs.cols() == idim && p.targets.size() == n &&
                  p.latent_mode.size() == n && p.grad_log_lik.size() == n && p.sqrt_w.size() == n &&
                  p.chol_b.rows() == n && p.chol_b.cols() == n);
      return std::make_unique<GaussianProcessModel>(std::move(spec), std::move(st), std::move(p));
    }
    case ClassifierKind::kLinearSvm: {
      Standardizer st = detail::get_standardizer(r);
      LinearSvmSolution s;
      s.weights = detail::get_vector(r);
      s.bias = r.get<double>();
      require_dim(st.mean.size() == idim && s.weights.size() == idim);
      return std::make_unique<LinearSvmModel>(std::move(spec), std::move(st), std::move(s));
    }
    case ClassifierKind::kRbfSvm: {
      Standardizer st = detail::get_standardizer(r);
      RbfSvmSolution s;
      s.support = detail::get_matrix<Eigen::MatrixXd>(r);
      s.coef = detail::get_vector(r);
      s.sigma = r.get<double>();
      s.kernel_form = static_cast<RbfForm>(r.get<std::uint8_t>());
      s.passes = static_cast<std::size_t>(r.get<std::uint64_t>());
      s.converged = r.get<std::uint8_t>() != 0;
      require_dim(st.mean.size() == idim && s.coef.size() == s.support.rows() &&
                  (s.support.rows() == 0 || s.support.cols() == idim));
      return std::make_unique<RbfSvmModel>(std::move(spec), std::move(st), std::move(s));
    }
    case ClassifierKind::kRandomForest: {
      std::vector<DecisionTree> trees(detail::checked_count(r.get<std::uint64_t>()));
      for (auto& t : trees) t = get_tree(r, dim);
      return std::make_unique<RandomForestModel>(std::move(spec), dim, std::move(trees));
    }
    case ClassifierKind::kAdaBoost: {
      const auto n = detail::checked_count(r.get<std::uint64_t>());
      std::vector<Stump> stumps(n);
      std::vector<double> alphas(n);
      for (std::size_t i = 0; i < n; ++i) {
        stumps[i].feature = static_cast<std::size_t>(r.get<std::uint64_t>());
        stumps[i].threshold = r.get<double>();
        stumps[i].polarity = r.get<std::int8_t>();
        alphas[i] = r.get<double>();
        require_dim(stumps[i].feature < dim && (stumps[i].polarity == 1 || stumps[i].polarity == -1));
      }
      return std::make_unique<AdaBoostModel>(std::move(spec), dim, std::move(stumps), std::move(alphas));
    }
    case ClassifierKind::kMlp: {
      Standardizer st = detail::get_standardizer(r);
      MlpModel net = detail::get_mlp(r);
      require_dim(st.mean.size() == idim && net.input_dim() == dim);
      return std::make_unique<MlpClassifierModel>(std::move(spec), std::move(st), std::move(net));
    }
  }
  throw DataError("corrupt model: unknown classifier kind");
}

}  // namespace

void save_model(const TrainedModel& model, std::ostream& out) {
  BinaryWriter w(out);
  w.put_bytes(kMagic, sizeof kMagic);
  w.put(kVersion);
  w.put(static_cast<std::uint8_t>(model.kind()));
  w.put(model.spec().seed);
  w.put<std::uint64_t>(model.feature_dim());
  put_params(w, model.spec().params);
  put_payload(w, model);
  if (!out) throw DataError("failed writing model stream");
}

std::unique_ptr<TrainedModel> load_model(std::istream& in) {
  BinaryReader r(in);
  char magic[4];
  r.read_exact(magic, sizeof magic);
  if (!std::equal(magic, magic + 4, kMagic)) throw DataError("not a castguard model (bad magic)");
  const auto version = r.get<std::uint8_t>();
  if (version != kVersion) {
    throw DataError("unsupported model version " + std::to_string(version));
  }
  const auto kind_byte = r.get<std::uint8_t>();
  if (kind_byte >= kAllClassifierKinds.size()) {
    throw DataError("corrupt model: unknown classifier kind " + std::to_string(kind_byte));
  }
  ClassifierSpec spec;
  spec.kind = static_cast<ClassifierKind>(kind_byte);
  spec.seed = r.get<std::uint64_t>();
  const auto dim = static_cast<std::size_t>(detail::checked_count(r.get<std::uint64_t>()));
  spec.params = get_params(r, spec.kind);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw DataError(std::string("corrupt model: ") + e.what());
  }
  return get_payload(r, std::move(spec), dim);
}

}  // namespace castguard
