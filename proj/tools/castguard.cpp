// castguard: benchmark, uncertainty and PCA-map runner over FMX/CSV feature files.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "castguard/error.hpp"
#include "castguard/experiment.hpp"

namespace {

using castguard::ValidationError;

struct Flags {
  std::string config;
  std::vector<std::string> inputs;
  std::string classifiers;
  std::size_t runs = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;
  std::size_t n_per_class = 0;
  std::size_t dim = 0;
  double separation = 0.0;
  double sigma = 0.0;
  std::size_t members = 0;
  std::size_t epochs = 0;
  std::size_t components = 0;
  bool pca_train = false;
  bool save_models = false;
  bool save_ensemble = false;
  std::string ensemble;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("CASTGUARD_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used, 10);
    if (used != std::string(raw).size() || std::string(raw).front() == '-') throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("CASTGUARD_SEED must be a non-negative integer, got \"") + raw + "\"");
  }
}

std::vector<castguard::ClassifierKind> parse_list(const std::string& text) {
  std::vector<castguard::ClassifierKind> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(castguard::parse_classifier_kind(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ValidationError("--classifiers is empty");
  return out;
}

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override it")->check(CLI::ExistingFile);
  cmd->add_option("--input", f.inputs, "FMX or CSV feature file (repeatable); synthetic data when absent");
  cmd->add_option("--runs", f.runs, "train/evaluate cycles per classifier");
  cmd->add_option("--threshold", f.threshold, "entropy certainty threshold");
  cmd->add_option("--seed", f.seed, "master seed (falls back to CASTGUARD_SEED)");
  cmd->add_option("--jobs", f.jobs, "worker threads");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--n-per-class", f.n_per_class, "synthetic samples per class");
  cmd->add_option("--dim", f.dim, "synthetic feature count");
  cmd->add_option("--separation", f.separation, "synthetic class-mean distance");
  cmd->add_option("--sigma", f.sigma, "synthetic noise standard deviation");
  cmd->add_option("--members", f.members, "ensemble size");
  cmd->add_option("--epochs", f.epochs, "ensemble training epochs");
}

bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

castguard::ExperimentConfig build_config(const CLI::App* cmd, const Flags& f) {
  bool seed_in_file = false;
  castguard::ExperimentConfig c;
  if (given(cmd, "--config")) c = castguard::load_config(f.config, &seed_in_file);
  if (given(cmd, "--input")) c.inputs.assign(f.inputs.begin(), f.inputs.end());
  if (given(cmd, "--classifiers")) c.classifiers = parse_list(f.classifiers);
  if (given(cmd, "--runs")) c.runs = f.runs;
  if (given(cmd, "--threshold")) c.threshold = f.threshold;
  if (given(cmd, "--jobs")) c.jobs = f.jobs;
  if (given(cmd, "--out")) c.out_dir = f.out;
  if (given(cmd, "--n-per-class")) c.synth.n_per_class = f.n_per_class;
  if (given(cmd, "--dim")) c.synth.dim = f.dim;
  if (given(cmd, "--separation")) c.synth.class_separation = f.separation;
  if (given(cmd, "--sigma")) c.synth.noise_sigma = f.sigma;
  if (given(cmd, "--members")) c.ensemble.n_members = f.members;
  if (given(cmd, "--epochs")) c.ensemble.train_config.epochs = f.epochs;
  if (given(cmd, "--components")) c.pca_components = f.components;
  if (given(cmd, "--pca-train")) c.pca_train_on_projection = true;
  if (given(cmd, "--seed")) {
    c.master_seed = f.seed;
  } else if (!seed_in_file) {
    if (const auto s = env_seed()) c.master_seed = *s;
  }
  c.validate();
  return c;
}

castguard::CommandOptions command_options(const CLI::App* cmd, const Flags& f) {
  castguard::CommandOptions o;
  o.save_models = f.save_models;
  o.save_ensemble = f.save_ensemble;
  if (given(cmd, "--ensemble")) o.ensemble_path = f.ensemble;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"castguard: casting-defect classifier benchmark and deep-ensemble uncertainty toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* bench = app.add_subcommand("bench", "benchmark classifiers over repeated train/test splits");
  add_experiment_flags(bench, f);
  bench->add_option("--classifiers", f.classifiers, "comma-separated list, e.g. linear_svm,mlp");
  bench->add_flag("--save-models", f.save_models, "write the run-0 model of each classifier");

  auto* uq = app.add_subcommand("uq", "train the ensemble and assess predictive uncertainty");
  add_experiment_flags(uq, f);
  uq->add_flag("--save-ensemble", f.save_ensemble, "write the trained ensemble");

  auto* pca = app.add_subcommand("pca-map", "project test features with PCA and attach entropies");
  add_experiment_flags(pca, f);
  pca->add_option("--components", f.components, "number of principal components (default 2)");
  pca->add_flag("--pca-train", f.pca_train, "train the ensemble on the projected features");
  pca->add_option("--ensemble", f.ensemble, "use a saved ensemble instead of training")->check(CLI::ExistingFile);
  pca->add_flag("--save-ensemble", f.save_ensemble, "write the trained ensemble");

  castguard::SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic two-cluster dataset as FMX");
  synth->add_option("--n-per-class", synth_spec.n_per_class, "samples per class");
  synth->add_option("--dim", synth_spec.dim, "feature count");
  synth->add_option("--separation", synth_spec.class_separation, "distance between class means");
  synth->add_option("--sigma", synth_spec.noise_sigma, "noise standard deviation");
  synth->add_option("--seed", synth_spec.seed, "seed (falls back to CASTGUARD_SEED)");
  synth->add_option("--out", synth_out, "output .fmx path")->required();

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "print an FMX header");
  inspect->add_option("file", inspect_path, "FMX file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      castguard::cmd_bench(build_config(bench, f), command_options(bench, f), std::cout);
    } else if (uq->parsed()) {
      castguard::cmd_uq(build_config(uq, f), command_options(uq, f), std::cout);
    } else if (pca->parsed()) {
      castguard::cmd_pca_map(build_config(pca, f), command_options(pca, f), std::cout);
    } else if (synth->parsed()) {
      if (synth->count("--seed") == 0) {
        if (const auto s = env_seed()) synth_spec.seed = *s;
      }
      castguard::cmd_synth(synth_spec, synth_out, std::cout);
    } else if (inspect->parsed()) {
      castguard::cmd_inspect(inspect_path, std::cout);
    }
  } catch (const castguard::ValidationError& e) {
    std::cerr << "castguard: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const castguard::DataError& e) {
    std::cerr << "castguard: data error: " << e.what() << "\n";
    return 3;
  } catch (const castguard::TrainingError& e) {
    std::cerr << "castguard: training failed: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "castguard: data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "castguard: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
