#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "castguard/error.hpp"
#include "castguard/experiment.hpp"

namespace castguard {
namespace {

using nlohmann::json;

// Typed access to one JSON object that rejects keys nobody asked about.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError("config: " + path_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: " + where(key) + " has the wrong type");
    }
  }

  void get_seed(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ValidationError("config: " + where(key) + " must be a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void get_size(const std::string& key, std::size_t& out) {
    std::uint64_t v = out;
    get_seed(key, v);
    out = static_cast<std::size_t>(v);
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError("config: unknown key " + where(it.key()));
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

RbfForm parse_form(const std::string& s) {
  if (s == "squared") return RbfForm::kSquared;
  if (s == "literal") return RbfForm::kLiteral;
  throw ValidationError("config: kernel_form must be \"squared\" or \"literal\", got \"" + s + "\"");
}
std::string form_name(RbfForm f) { return f == RbfForm::kSquared ? "squared" : "literal"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw ValidationError("config: activation must be \"relu\" or \"tanh\", got \"" + s + "\"");
}
std::string activation_name(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::kAdam;
  if (s == "sgd") return Optimizer::kSgd;
  throw ValidationError("config: optimizer must be \"adam\" or \"sgd\", got \"" + s + "\"");
}
std::string optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }

void read_train(Section& s, TrainConfig& t) {
  s.get_size("epochs", t.epochs);
  s.get_size("batch_size", t.batch_size);
  s.get("learning_rate", t.learning_rate);
  if (s.has("optimizer")) t.optimizer = parse_optimizer(s.child("optimizer").get<std::string>());
}

json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"optimizer", optimizer_name(t.optimizer)}};
}

void read_params(const json& node, const std::string& path, Hyperparameters& params) {
  Section s(node, path);
  std::visit(
      [&s](auto& p) {
        using P = std::decay_t<decltype(p)>;
        auto form = [&s](RbfForm& f) {
          if (s.has("kernel_form")) f = parse_form(s.child("kernel_form").get<std::string>());
        };
        if constexpr (std::is_same_v<P, KnnParams>) {
          s.get_size("k", p.k);
        } else if constexpr (std::is_same_v<P, GaussianNbParams>) {
          s.get("var_smoothing", p.var_smoothing);
        } else if constexpr (std::is_same_v<P, GpConfig>) {
          s.get("length_scale", p.length_scale);
          s.get("jitter", p.jitter);
          s.get_size("max_newton_iters", p.max_newton_iters);
          s.get("newton_tol", p.newton_tol);
          s.get_size("max_samples", p.max_samples);
          form(p.kernel_form);
        } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
          s.get("reg_c", p.reg_c);
          s.get_size("epochs", p.epochs);
        } else if constexpr (std::is_same_v<P, RbfSvmParams>) {
          s.get("reg_c", p.reg_c);
          s.get("sigma", p.sigma);
          s.get_size("max_passes", p.max_passes);
          s.get("tolerance", p.tolerance);
          form(p.kernel_form);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          s.get_size("n_trees", p.n_trees);
          s.get("bootstrap", p.bootstrap);
          s.get_size("max_features", p.max_features);
          s.get_size("min_leaf", p.min_leaf);
          s.get_size("max_depth", p.max_depth);
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          s.get_size("n_rounds", p.n_rounds);
        } else {
          s.get("hidden_sizes", p.hidden_sizes);
          if (s.has("activation")) p.activation = parse_activation(s.child("activation").get<std::string>());
          read_train(s, p.train);
        }
      },
      params);
  s.finish();
}

json params_json(const Hyperparameters& params) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          return {{"k", p.k}};
        } else if constexpr (std::is_same_v<P, GaussianNbParams>) {
          return {{"var_smoothing", p.var_smoothing}};
        } else if constexpr (std::is_same_v<P, GpConfig>) {
          return {{"length_scale", p.length_scale}, {"jitter", p.jitter},
                  {"max_newton_iters", p.max_newton_iters}, {"newton_tol", p.newton_tol},
                  {"max_samples", p.max_samples}, {"kernel_form", form_name(p.kernel_form)}};
        } else if constexpr (std::is_same_v<P, LinearSvmParams>) {
          return {{"reg_c", p.reg_c}, {"epochs", p.epochs}};
        } else if constexpr (std::is_same_v<P, RbfSvmParams>) {
          return {{"reg_c", p.reg_c}, {"sigma", p.sigma}, {"max_passes", p.max_passes},
                  {"tolerance", p.tolerance}, {"kernel_form", form_name(p.kernel_form)}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          return {{"n_trees", p.n_trees}, {"bootstrap", p.bootstrap}, {"max_features", p.max_features},
                  {"min_leaf", p.min_leaf}, {"max_depth", p.max_depth}};
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return {{"n_rounds", p.n_rounds}};
        } else {
          json j = train_json(p.train);
          j["hidden_sizes"] = p.hidden_sizes;
          j["activation"] = activation_name(p.activation);
          return j;
        }
      },
      params);
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const auto kind : kAllClassifierKinds) {
    params[static_cast<std::size_t>(kind)] = ClassifierSpec::defaults(kind).params;
  }
}

ClassifierSpec ExperimentConfig::classifier_spec(ClassifierKind kind, std::uint64_t seed) const {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.params = params[static_cast<std::size_t>(kind)];
  spec.seed = seed;
  return spec;
}

void ExperimentConfig::validate() const {
  if (runs == 0) throw ValidationError("runs must be at least 1");
  if (classifiers.empty()) throw ValidationError("no classifiers selected");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  if (threshold_grid.empty()) throw ValidationError("threshold_grid is empty");
  for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
    if (!(threshold_grid[i] >= 0.0 && threshold_grid[i] <= 1.0) ||
        (i > 0 && threshold_grid[i] < threshold_grid[i - 1])) {
      throw ValidationError("threshold_grid must be ascending within [0, 1]");
    }
  }
  if (histogram_bins < 2) throw ValidationError("histogram_bins must be at least 2");
  if (pca_components == 0) throw ValidationError("pca.components must be positive");
  if (jobs == 0) throw ValidationError("jobs must be at least 1");
  if (inputs.empty()) castguard::validate(synth);
  for (const auto kind : classifiers) classifier_spec(kind, 0).validate();
  ensemble.validate();
}

ExperimentConfig parse_config(std::string_view json_text, bool* seed_present) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section root(doc, "config");

  if (root.has("inputs")) {
    std::vector<std::string> paths;
    root.get("inputs", paths);
    c.inputs.assign(paths.begin(), paths.end());
  }
  root.get("label_column", c.label_column);
  if (root.has("synth")) {
    Section s(root.child("synth"), "synth");
    s.get_size("n_per_class", c.synth.n_per_class);
    s.get_size("dim", c.synth.dim);
    s.get("class_separation", c.synth.class_separation);
    s.get("noise_sigma", c.synth.noise_sigma);
    s.finish();
  }
  if (root.has("classifiers")) {
    std::vector<std::string> names;
    root.get("classifiers", names);
    c.classifiers.clear();
    for (const auto& n : names) c.classifiers.push_back(parse_classifier_kind(n));
  }
  if (root.has("classifier_params")) {
    const json& node = root.child("classifier_params");
    if (!node.is_object()) throw ValidationError("config: classifier_params must be an object");
    for (auto it = node.begin(); it != node.end(); ++it) {
      const auto kind = parse_classifier_kind(it.key());
      read_params(it.value(), "classifier_params." + it.key(), c.params[static_cast<std::size_t>(kind)]);
    }
  }
  root.get_size("runs", c.runs);
  if (root.has("split")) {
    Section s(root.child("split"), "split");
    s.get("train_fraction", c.train_fraction);
    s.get("stratified", c.stratified);
    s.finish();
  }
  if (root.has("ensemble")) {
    Section s(root.child("ensemble"), "ensemble");
    s.get_size("n_members", c.ensemble.n_members);
    s.get("depth_choices", c.ensemble.depth_choices);
    if (s.has("width_ranges")) {
      std::vector<std::array<std::size_t, 2>> ranges;
      s.get("width_ranges", ranges);
      c.ensemble.width_ranges.clear();
      for (const auto& r : ranges) c.ensemble.width_ranges.push_back({r[0], r[1]});
    }
    if (s.has("activation")) c.ensemble.activation = parse_activation(s.child("activation").get<std::string>());
    s.get("standardize", c.ensemble.standardize);
    read_train(s, c.ensemble.train_config);
    s.finish();
  }
  root.get("threshold", c.threshold);
  root.get("threshold_grid", c.threshold_grid);
  root.get_size("histogram_bins", c.histogram_bins);
  if (root.has("pca")) {
    Section s(root.child("pca"), "pca");
    s.get_size("components", c.pca_components);
    s.get("train_on_projection", c.pca_train_on_projection);
    s.finish();
  }
  if (root.has("out")) {
    std::string out;
    root.get("out", out);
    c.out_dir = out;
  }
  const bool has_seed = root.has("seed");
  root.get_seed("seed", c.master_seed);
  if (seed_present != nullptr) *seed_present = has_seed;
  root.get_size("jobs", c.jobs);
  root.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool* seed_present) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), seed_present);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  std::vector<std::string> inputs;
  for (const auto& p : c.inputs) inputs.push_back(p.string());
  j["inputs"] = inputs;
  j["label_column"] = c.label_column;
  j["synth"] = {{"n_per_class", c.synth.n_per_class},
                {"dim", c.synth.dim},
                {"class_separation", c.synth.class_separation},
                {"noise_sigma", c.synth.noise_sigma}};
  std::vector<std::string> names;
  for (const auto k : c.classifiers) names.emplace_back(to_string(k));
  j["classifiers"] = names;
  json params = json::object();
  for (const auto k : kAllClassifierKinds) params[std::string(to_string(k))] = params_json(c.params[static_cast<std::size_t>(k)]);
  j["classifier_params"] = params;
  j["runs"] = c.runs;
  j["split"] = {{"train_fraction", c.train_fraction}, {"stratified", c.stratified}};
  json ens = train_json(c.ensemble.train_config);
  ens["n_members"] = c.ensemble.n_members;
  ens["depth_choices"] = c.ensemble.depth_choices;
  json ranges = json::array();
  for (const auto& r : c.ensemble.width_ranges) ranges.push_back({r.low, r.high});
  ens["width_ranges"] = ranges;
  ens["activation"] = activation_name(c.ensemble.activation);
  ens["standardize"] = c.ensemble.standardize;
  j["ensemble"] = ens;
  j["threshold"] = c.threshold;
  j["threshold_grid"] = c.threshold_grid;
  j["histogram_bins"] = c.histogram_bins;
  j["pca"] = {{"components", c.pca_components}, {"train_on_projection", c.pca_train_on_projection}};
  j["out"] = c.out_dir.string();
  j["seed"] = c.master_seed;
  j["jobs"] = c.jobs;
  return j.dump(2) + "\n";
}

}  // namespace castguard
