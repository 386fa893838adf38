#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "castguard/classifiers/classifier.hpp"
#include "castguard/dataset.hpp"
#include "castguard/metrics.hpp"
#include "castguard/pca.hpp"
#include "castguard/uq.hpp"

namespace castguard {

/// Everything one CLI invocation needs. Built from defaults, then a JSON
/// config file, then command-line flags.
struct ExperimentConfig {
  std::vector<std::filesystem::path> inputs;  // .fmx or .csv; empty = synthetic data
  std::string label_column = "label";         // CSV inputs only
  SynthSpec synth;                            // seed is replaced by master_seed

  std::vector<ClassifierKind> classifiers{kAllClassifierKinds.begin(), kAllClassifierKinds.end()};
  std::array<Hyperparameters, 8> params;  // indexed by ClassifierKind
  std::size_t runs = 100;
  double train_fraction = 0.75;
  bool stratified = true;

  EnsembleConfig ensemble;  // member_seed_base is replaced by master_seed
  double threshold = kDefaultThreshold;
  std::vector<double> threshold_grid = default_threshold_grid();
  std::size_t histogram_bins = 20;

  std::size_t pca_components = 2;
  bool pca_train_on_projection = false;

  std::filesystem::path out_dir = "castguard-out";
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;

  ExperimentConfig();
  void validate() const;
  ClassifierSpec classifier_spec(ClassifierKind kind, std::uint64_t seed) const;
};

/// Reads a JSON config document. Unknown keys are rejected. `seed_present`
/// reports whether the document set "seed".
ExperimentConfig parse_config(std::string_view json_text, bool* seed_present = nullptr);
ExperimentConfig load_config(const std::filesystem::path& path, bool* seed_present = nullptr);
/// Full JSON echo of a config; parse_config(config_to_json(c)) == c field-wise.
std::string config_to_json(const ExperimentConfig& config);

/// Reads every input (by extension), or generates the synthetic dataset.
std::vector<FeatureDataset> load_inputs(const ExperimentConfig& config);

/// Split used by run `run_index`: seed = master_seed + run_index.
std::pair<FeatureDataset, FeatureDataset> run_split(const ExperimentConfig& config,
                                                    const FeatureDataset& data, std::size_t run_index);

// --- bench --------------------------------------------------------------

struct BenchRow {
  std::size_t run_index = 0;
  ClassifierKind classifier = ClassifierKind::kKnn;
  std::string architecture_tag;
  std::optional<double> accuracy;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> auc;
  std::string status = "ok";  // "ok" or "failed: <reason>"
};

using ModelSink = std::function<void(const std::string& tag, std::size_t run_index, const TrainedModel&)>;

/// runs x classifiers train/evaluate cycles for each dataset. Rows are ordered
/// by dataset, run, classifier and do not depend on `jobs`.
std::vector<BenchRow> run_bench(const ExperimentConfig& config, const std::vector<FeatureDataset>& datasets,
                                const ModelSink& sink = {});

// --- uq / pca-map -------------------------------------------------------

struct UqRun {
  std::string architecture_tag;
  EnsembleModel ensemble;
  UqAssessment assessment;
  UqConfusion confusion;
  double uncertainty_accuracy = 0.0;
  double accuracy = 0.0;
  std::vector<SweepRow> sweep;
  EntropyHistogram histogram;
  EntropyGroupMeans group_means;
};

/// Trains (or reuses) the ensemble on the run-0 train split and assesses the test split.
UqRun run_uq(const ExperimentConfig& config, const FeatureDataset& data,
             const EnsembleModel* preloaded = nullptr);

struct PcaMap {
  UqRun uq;
  PcaModel pca;
  Eigen::MatrixXd coordinates;  // test rows x q
};

/// PCA fitted on the train split gives 2-D (or q-D) coordinates for the test
/// split. By default the ensemble sees full features; with
/// pca_train_on_projection it is trained on the projection instead.
PcaMap run_pca_map(const ExperimentConfig& config, const FeatureDataset& data,
                   const EnsembleModel* preloaded = nullptr);

// --- output -------------------------------------------------------------

void write_per_run_csv(const std::vector<BenchRow>& rows, std::ostream& out);
std::string bench_summary_json(const std::vector<BenchRow>& rows);
void print_bench_table(const std::vector<BenchRow>& rows, std::ostream& out);

void write_sweep_csv(const std::vector<SweepRow>& sweep, std::ostream& out);
void write_histogram_csv(const EntropyHistogram& histogram, std::ostream& out);
void write_uq_per_run_csv(const std::vector<UqRun>& runs, std::ostream& out);
std::string uq_summary_json(const std::vector<UqRun>& runs);
void print_uq_table(const std::vector<UqRun>& runs, std::ostream& out);
/// CSV columns: sample_index,pc1,pc2,...,entropy,predicted,true
void write_pca_map_csv(const PcaMap& map, std::ostream& out);

// --- commands -----------------------------------------------------------

struct CommandOptions {
  bool save_models = false;
  bool save_ensemble = false;
  std::optional<std::filesystem::path> ensemble_path;
};

/// Each command writes config-echo.json, per-run.csv, summary.json and its
/// figure CSVs into config.out_dir, and a human-readable table to `report`.
void cmd_bench(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report);
void cmd_uq(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report);
void cmd_pca_map(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report);
void cmd_synth(const SynthSpec& spec, const std::filesystem::path& out, std::ostream& report);
void cmd_inspect(const std::filesystem::path& path, std::ostream& report);

/// File-name-safe form of a dataset tag.
std::string file_tag(std::string_view tag);

}  // namespace castguard
