#include <fstream>
#include <iostream>

#include "castguard/error.hpp"
#include "castguard/experiment.hpp"

namespace castguard {
namespace {

UqRun uq_on_split(const ExperimentConfig& config, const FeatureDataset& train, const FeatureDataset& test,
                  const EnsembleModel* preloaded) {
  UqRun run;
  run.architecture_tag = test.source_tag();
  if (preloaded != nullptr) {
    if (preloaded->input_dim() != test.feature_dim()) {
      throw ValidationError("dimension mismatch: loaded ensemble expects " +
                            std::to_string(preloaded->input_dim()) + " features, data has " +
                            std::to_string(test.feature_dim()));
    }
    run.ensemble = *preloaded;
  } else {
    EnsembleConfig ens = config.ensemble;
    ens.member_seed_base = config.master_seed;
    run.ensemble = ensemble_train(ens, train, config.jobs);
  }
  run.assessment = assess(run.ensemble, test, config.threshold);
  run.confusion = uq_confusion(run.assessment);
  run.uncertainty_accuracy = uncertainty_accuracy(run.confusion);
  std::size_t correct = 0;
  for (const auto& s : run.assessment.samples) correct += s.correct ? 1 : 0;
  run.accuracy = static_cast<double>(correct) / static_cast<double>(run.assessment.size());
  run.sweep = threshold_sweep(run.assessment, config.threshold_grid);
  run.histogram = entropy_histogram(run.assessment, config.histogram_bins);
  run.group_means = mean_entropy_by_group(run.assessment);
  return run;
}

FeatureDataset project(const PcaModel& pca, const FeatureDataset& data) {
  FeatureMatrix coords = pca_transform(pca, data.features()).cast<float>();
  return FeatureDataset(std::move(coords), data.labels(), data.source_tag());
}

template <typename Fn>
void write_stream(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  fn(out);
  if (!out) throw DataError("failed writing " + path.string());
}

void prepare_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
  write_stream(config.out_dir / "config-echo.json", [&config](std::ostream& out) { out << config_to_json(config); });
}

std::optional<EnsembleModel> maybe_load(const CommandOptions& options) {
  if (!options.ensemble_path) return std::nullopt;
  std::ifstream in(*options.ensemble_path, std::ios::binary);
  if (!in) throw DataError("cannot open ensemble file " + options.ensemble_path->string());
  return load_ensemble(in);
}

}  // namespace

UqRun run_uq(const ExperimentConfig& config, const FeatureDataset& data, const EnsembleModel* preloaded) {
  config.validate();
  const auto [train, test] = run_split(config, data, 0);
  return uq_on_split(config, train, test, preloaded);
}

PcaMap run_pca_map(const ExperimentConfig& config, const FeatureDataset& data, const EnsembleModel* preloaded) {
  config.validate();
  const auto [train, test] = run_split(config, data, 0);
  PcaOptions opts;
  opts.seed = config.master_seed;
  PcaMap map{{}, pca_fit(train.features(), config.pca_components, opts), {}};
  map.coordinates = pca_transform(map.pca, test.features());
  if (config.pca_train_on_projection) {
    map.uq = uq_on_split(config, project(map.pca, train), project(map.pca, test), preloaded);
  } else {
    map.uq = uq_on_split(config, train, test, preloaded);
  }
  return map;
}

void cmd_uq(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report) {
  config.validate();
  prepare_out_dir(config);
  const auto loaded = maybe_load(options);
  const auto datasets = load_inputs(config);
  std::vector<UqRun> runs;
  for (const auto& data : datasets) {
    std::clog << "uq: " << (data.source_tag().empty() ? "(untagged)" : data.source_tag()) << ": "
              << config.ensemble.n_members << "-member ensemble on " << data.size() << " samples x "
              << data.feature_dim() << " features\n";
    runs.push_back(run_uq(config, data, loaded ? &*loaded : nullptr));
    const UqRun& run = runs.back();
    const std::string tag = file_tag(run.architecture_tag);
    write_stream(config.out_dir / ("assessment_" + tag + ".csv"),
                 [&run](std::ostream& out) { write_assessment_csv(run.assessment, out); });
    write_stream(config.out_dir / ("sweep_" + tag + ".csv"),
                 [&run](std::ostream& out) { write_sweep_csv(run.sweep, out); });
    write_stream(config.out_dir / ("histogram_" + tag + ".csv"),
                 [&run](std::ostream& out) { write_histogram_csv(run.histogram, out); });
    if (options.save_ensemble) {
      write_stream(config.out_dir / ("ensemble_" + tag + ".cge"),
                   [&run](std::ostream& out) { save_ensemble(run.ensemble, out); });
    }
  }
  write_stream(config.out_dir / "per-run.csv", [&runs](std::ostream& out) { write_uq_per_run_csv(runs, out); });
  write_stream(config.out_dir / "summary.json", [&runs](std::ostream& out) { out << uq_summary_json(runs); });
  print_uq_table(runs, report);
}

void cmd_pca_map(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report) {
  config.validate();
  prepare_out_dir(config);
  const auto loaded = maybe_load(options);
  const auto datasets = load_inputs(config);
  std::vector<UqRun> runs;
  for (const auto& data : datasets) {
    std::clog << "pca-map: " << (data.source_tag().empty() ? "(untagged)" : data.source_tag()) << ": "
              << config.pca_components << " components"
              << (config.pca_train_on_projection ? ", ensemble trained on the projection" : "") << "\n";
    PcaMap map = run_pca_map(config, data, loaded ? &*loaded : nullptr);
    write_stream(config.out_dir / ("map_" + file_tag(map.uq.architecture_tag) + ".csv"),
                 [&map](std::ostream& out) { write_pca_map_csv(map, out); });
    const Eigen::VectorXd ratio = map.pca.explained_variance_ratio();
    report << (map.uq.architecture_tag.empty() ? "(untagged)" : map.uq.architecture_tag)
           << ": explained variance ratio";
    for (Eigen::Index i = 0; i < ratio.size(); ++i) report << ' ' << ratio(i);
    report << "\n";
    if (options.save_ensemble) {
      write_stream(config.out_dir / ("ensemble_" + file_tag(map.uq.architecture_tag) + ".cge"),
                   [&map](std::ostream& out) { save_ensemble(map.uq.ensemble, out); });
    }
    runs.push_back(std::move(map.uq));
  }
  write_stream(config.out_dir / "per-run.csv", [&runs](std::ostream& out) { write_uq_per_run_csv(runs, out); });
  write_stream(config.out_dir / "summary.json", [&runs](std::ostream& out) { out << uq_summary_json(runs); });
  print_uq_table(runs, report);
}

}  // namespace castguard
