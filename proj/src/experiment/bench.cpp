#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include "castguard/classifiers.hpp"
#include "castguard/error.hpp"
#include "castguard/experiment.hpp"
#include "castguard/parallel.hpp"
#include "castguard/random.hpp"

namespace castguard {

std::vector<FeatureDataset> load_inputs(const ExperimentConfig& config) {
  std::vector<FeatureDataset> out;
  if (config.inputs.empty()) {
    SynthSpec spec = config.synth;
    spec.seed = config.master_seed;
    out.push_back(gen_synth(spec));
    return out;
  }
  for (const auto& path : config.inputs) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".fmx") {
      out.push_back(read_fmx(path));
    } else if (ext == ".csv") {
      out.push_back(read_csv(path, config.label_column));
    } else {
      throw DataError("unsupported input " + path.string() + " (expected .fmx or .csv)");
    }
    // Reports group by tag, so every input needs a distinct one.
    std::string tag = out.back().source_tag().empty() ? path.stem().string() : out.back().source_tag();
    const std::string base = tag;
    for (int k = 2; std::any_of(out.begin(), out.end() - 1, [&](const auto& d) { return d.source_tag() == tag; }); ++k) {
      tag = base + "-" + std::to_string(k);
    }
    if (tag != out.back().source_tag()) {
      FeatureDataset& last = out.back();
      last = FeatureDataset(last.features(), last.labels(), tag);
    }
  }
  return out;
}

std::pair<FeatureDataset, FeatureDataset> run_split(const ExperimentConfig& config,
                                                    const FeatureDataset& data, std::size_t run_index) {
  SplitSpec spec;
  spec.train_fraction = config.train_fraction;
  spec.stratified = config.stratified;
  spec.seed = config.master_seed + run_index;
  return split_dataset(data, spec);
}

namespace {

BenchRow evaluate(const ExperimentConfig& config, ClassifierKind kind, std::size_t run,
                  const FeatureDataset& train, const FeatureDataset& test, const std::string& tag,
                  const ModelSink& sink) {
  BenchRow row;
  row.run_index = run;
  row.classifier = kind;
  row.architecture_tag = tag;
  try {
    const auto spec =
        config.classifier_spec(kind, derive_seed(config.master_seed + run, static_cast<std::uint64_t>(kind) + 1));
    const auto model = fit(spec, train);
    const Labels predicted = model->predict(test.features());
    const BinaryMetrics m = binary_metrics(predicted, test.labels());
    row.accuracy = m.accuracy;
    row.sensitivity = m.sensitivity;
    row.specificity = m.specificity;
    if (test.has_both_classes()) {
      const Eigen::VectorXd scores = model->score(test.features());
      row.auc = auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                    test.labels());
    }
    if (sink) sink(tag, run, *model);
  } catch (const Error& e) {
    row = BenchRow{run, kind, tag, {}, {}, {}, {}, std::string("failed: ") + e.what()};
  }
  return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const ExperimentConfig& config, const std::vector<FeatureDataset>& datasets,
                                const ModelSink& sink) {
  config.validate();
  const std::size_t n_kinds = config.classifiers.size();
  std::vector<BenchRow> rows(datasets.size() * config.runs * n_kinds);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const FeatureDataset& data = datasets[d];
    parallel_for(config.runs, config.jobs, [&](std::size_t run) {
      const auto [train, test] = run_split(config, data, run);
      for (std::size_t k = 0; k < n_kinds; ++k) {
        rows[(d * config.runs + run) * n_kinds + k] =
            evaluate(config, config.classifiers[k], run, train, test, data.source_tag(), sink);
      }
    });
  }
  return rows;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("failed writing " + path.string());
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
  write_file(config.out_dir / "config-echo.json", config_to_json(config));
}

}  // namespace

void cmd_bench(const ExperimentConfig& config, const CommandOptions& options, std::ostream& report) {
  config.validate();
  prepare_out_dir(config);
  const auto datasets = load_inputs(config);
  for (const auto& d : datasets) {
    std::clog << "bench: " << (d.source_tag().empty() ? "(untagged)" : d.source_tag()) << ": " << d.size()
              << " samples x " << d.feature_dim() << " features, " << config.runs << " runs x "
              << config.classifiers.size() << " classifiers\n";
  }

  ModelSink sink;
  if (options.save_models) {
    std::filesystem::create_directories(config.out_dir / "models");
    sink = [&config](const std::string& tag, std::size_t run, const TrainedModel& model) {
      if (run != 0) return;
      const auto path = config.out_dir / "models" /
                        (file_tag(tag) + "_" + std::string(to_string(model.kind())) + ".cgm");
      write_stream(path, [&model](std::ostream& out) { save_model(model, out); });
    };
  }
  const auto rows = run_bench(config, datasets, sink);

  write_stream(config.out_dir / "per-run.csv", [&rows](std::ostream& out) { write_per_run_csv(rows, out); });
  write_file(config.out_dir / "summary.json", bench_summary_json(rows));
  print_bench_table(rows, report);
}

void cmd_synth(const SynthSpec& spec, const std::filesystem::path& out, std::ostream& report) {
  validate(spec);
  const FeatureDataset data = gen_synth(spec);
  write_fmx(data, out);
  report << "wrote " << data.size() << " rows x " << data.feature_dim() << " features to " << out.string()
         << "\n";
}

void cmd_inspect(const std::filesystem::path& path, std::ostream& report) {
  const FmxHeader h = read_fmx_header(path);
  report << "file:       " << path.string() << "\n"
         << "version:    " << int{h.version} << "\n"
         << "rows:       " << h.rows << "\n"
         << "cols:       " << h.cols << "\n"
         << "has_labels: " << (h.has_labels ? "yes" : "no") << "\n"
         << "source_tag: " << h.source_tag << "\n"
         << "bytes:      " << fmx_file_size(h.rows, h.cols, h.has_labels, h.source_tag.size()) << "\n";
}

}  // namespace castguard
