#include "castguard/uq.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "castguard/error.hpp"
#include "castguard/parallel.hpp"
#include "castguard/random.hpp"
#include "model_codec.hpp"

namespace castguard {

void EnsembleConfig::validate() const {
  if (n_members < 2) throw ValidationError("ensemble needs at least 2 members");
  if (depth_choices.empty()) throw ValidationError("ensemble depth_choices is empty");
  for (const auto depth : depth_choices) {
    if (depth == 0) throw ValidationError("ensemble depth choices must be positive");
    if (depth > width_ranges.size()) {
      throw ValidationError("ensemble depth " + std::to_string(depth) + " has only " +
                            std::to_string(width_ranges.size()) + " width ranges");
    }
  }
  for (const auto& r : width_ranges) {
    if (r.low == 0 || r.low >= r.high) {
      throw ValidationError("ensemble width range (" + std::to_string(r.low) + ", " +
                            std::to_string(r.high) + ") must satisfy 0 < low < high");
    }
  }
  train_config.validate();
}

MlpArchitecture sample_member_architecture(const EnsembleConfig& config, std::size_t index,
                                           std::size_t input_dim) {
  config.validate();
  const std::uint64_t member_seed = config.member_seed_base + index;
  Rng rng = make_rng(derive_seed(member_seed, 0));
  std::uniform_int_distribution<std::size_t> pick_depth(0, config.depth_choices.size() - 1);
  const std::size_t depth = config.depth_choices[pick_depth(rng)];

  MlpArchitecture arch;
  arch.layer_sizes.push_back(input_dim);
  for (std::size_t j = 0; j < depth; ++j) {
    std::uniform_int_distribution<std::size_t> width(config.width_ranges[j].low, config.width_ranges[j].high);
    arch.layer_sizes.push_back(width(rng));
  }
  arch.layer_sizes.push_back(2);
  arch.activation = config.activation;
  arch.seed = derive_seed(member_seed, 1);
  return arch;
}

EnsembleModel ensemble_train(const EnsembleConfig& config, const FeatureDataset& train,
                             std::size_t jobs) {
  config.validate();
  if (!train.has_both_classes()) {
    throw TrainingError("degenerate training set: the ensemble needs both classes present");
  }
  EnsembleModel model;
  model.config = config;
  model.standardizer = config.standardize ? Standardizer::fit(train.features())
                                          : Standardizer::identity(train.feature_dim());
  const Eigen::MatrixXd inputs = model.standardizer.apply(train.features());
  model.members.resize(config.n_members);

  parallel_for(config.n_members, jobs, [&](std::size_t i) {
    TrainConfig cfg = config.train_config;
    cfg.shuffle_seed = derive_seed(config.member_seed_base + i, 2);
    try {
      model.members[i] = mlp_train(mlp_init(sample_member_architecture(config, i, train.feature_dim())),
                                   inputs, train.labels(), cfg);
    } catch (const TrainingError& e) {
      throw TrainingError("ensemble member " + std::to_string(i) + ": " + e.what());
    }
  });
  return model;
}

Eigen::VectorXd mean_probabilities(std::span<const Eigen::VectorXd> member_outputs) {
  if (member_outputs.empty()) throw ValidationError("no member outputs to average");
  Eigen::VectorXd mean = member_outputs.front();
  for (std::size_t k = 1; k < member_outputs.size(); ++k) {
    if (member_outputs[k].size() != mean.size()) throw ValidationError("member outputs differ in length");
    mean += (member_outputs[k] - mean) / static_cast<double>(k + 1);
  }
  return mean;
}

namespace {

void check_dim(const EnsembleModel& model, std::size_t dim) {
  if (model.members.empty()) throw ValidationError("ensemble has no members");
  if (dim != model.input_dim()) {
    throw ValidationError("dimension mismatch: ensemble expects " + std::to_string(model.input_dim()) +
                          " features, got " + std::to_string(dim));
  }
}

}  // namespace

Eigen::VectorXd ensemble_mean(const EnsembleModel& model, std::span<const float> x) {
  check_dim(model, x.size());
  FeatureMatrix row(1, static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), row.data());
  return ensemble_mean(model, row).row(0).transpose();
}

Eigen::MatrixXd ensemble_mean(const EnsembleModel& model, const FeatureMatrix& features) {
  check_dim(model, static_cast<std::size_t>(features.cols()));
  const Eigen::MatrixXd inputs = model.standardizer.apply(features);
  Eigen::MatrixXd mean = mlp_predict_proba(model.members.front(), inputs);
  for (std::size_t k = 1; k < model.members.size(); ++k) {
    mean += (mlp_predict_proba(model.members[k], inputs) - mean) / static_cast<double>(k + 1);
  }
  return mean;
}

double predictive_entropy(std::span<const double> p) {
  if (p.empty()) throw ValidationError("entropy of an empty distribution");
  constexpr double kTol = 1e-6;
  double sum = 0.0;
  for (const double v : p) {
    if (!std::isfinite(v) || v < -kTol || v > 1.0 + kTol) {
      throw ValidationError("entropy input is not a probability vector (component " + std::to_string(v) + ")");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTol) {
    throw ValidationError("entropy input does not sum to 1 (sum " + std::to_string(sum) + ")");
  }
  double h = 0.0;
  for (const double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::max(h, 0.0);
}

double predictive_entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  return predictive_entropy(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

std::uint8_t argmax_label(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != 2) throw ValidationError("argmax_label expects a two-class distribution");
  return p(1) >= p(0) ? kDefect : kNonDefect;
}

UqAssessment assess_probabilities(const Eigen::MatrixXd& probabilities, const Labels& truths,
                                  double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("certainty threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
  if (probabilities.rows() == 0) throw ValidationError("cannot assess an empty test set");
  if (probabilities.cols() != 2 || static_cast<std::size_t>(probabilities.rows()) != truths.size()) {
    throw ValidationError("assessment needs an n x 2 probability matrix and n labels");
  }
  UqAssessment out;
  out.threshold = threshold;
  out.samples.resize(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    auto& s = out.samples[i];
    s.mean_probs = probabilities.row(static_cast<Eigen::Index>(i)).transpose();
    s.entropy = predictive_entropy(Eigen::VectorXd(s.mean_probs));
    s.predicted = argmax_label(Eigen::VectorXd(s.mean_probs));
    s.truth = truths[i];
    s.certain = s.entropy < threshold;
    s.correct = s.predicted == s.truth;
  }
  return out;
}

UqAssessment assess(const EnsembleModel& model, const FeatureDataset& test, double threshold) {
  if (test.size() == 0) throw ValidationError("cannot assess an empty test set");
  return assess_probabilities(ensemble_mean(model, test.features()), test.labels(), threshold);
}

UqConfusion uq_confusion(const UqAssessment& assessment) {
  UqConfusion c;
  c.threshold = assessment.threshold;
  for (const auto& s : assessment.samples) {
    if (s.correct) (s.certain ? c.tc : c.fu) += 1;
    else (s.certain ? c.fc : c.tu) += 1;
  }
  return c;
}

double uncertainty_accuracy(const UqConfusion& c) {
  if (c.total() == 0) throw ValidationError("uncertainty accuracy of an empty confusion");
  return static_cast<double>(c.tu + c.tc) / static_cast<double>(c.total());
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<SweepRow> threshold_sweep(std::span<const double> entropies, const std::vector<bool>& correct,
                                      std::span<const double> thresholds) {
  if (thresholds.empty()) throw ValidationError("threshold sweep needs at least one threshold");
  if (entropies.size() != correct.size()) throw ValidationError("entropies and correctness differ in length");
  if (entropies.empty()) throw ValidationError("threshold sweep over an empty assessment");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) throw ValidationError("sweep thresholds must lie in [0, 1]");
    if (i > 0 && thresholds[i] < thresholds[i - 1]) throw ValidationError("sweep thresholds must be ascending");
  }
  std::vector<SweepRow> rows;
  rows.reserve(thresholds.size());
  for (const double t : thresholds) {
    SweepRow row;
    row.threshold = t;
    row.confusion.threshold = t;
    for (std::size_t i = 0; i < entropies.size(); ++i) {
      const bool certain = entropies[i] < t;
      if (correct[i]) (certain ? row.confusion.tc : row.confusion.fu) += 1;
      else (certain ? row.confusion.fc : row.confusion.tu) += 1;
    }
    row.uncertainty_accuracy = uncertainty_accuracy(row.confusion);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> threshold_sweep(const UqAssessment& assessment, std::span<const double> thresholds) {
  std::vector<double> entropies;
  std::vector<bool> correct;
  for (const auto& s : assessment.samples) {
    entropies.push_back(s.entropy);
    correct.push_back(s.correct);
  }
  return threshold_sweep(entropies, correct, thresholds);
}

EntropyHistogram entropy_histogram(const UqAssessment& assessment, std::size_t n_bins) {
  if (n_bins < 2) throw ValidationError("entropy histogram needs at least 2 bins");
  EntropyHistogram h;
  h.correct.assign(n_bins, 0);
  h.incorrect.assign(n_bins, 0);
  for (std::size_t i = 0; i <= n_bins; ++i) h.edges.push_back(static_cast<double>(i) / static_cast<double>(n_bins));
  for (const auto& s : assessment.samples) {
    const double scaled = std::clamp(s.entropy, 0.0, 1.0) * static_cast<double>(n_bins);
    const auto bin = std::min(static_cast<std::size_t>(scaled), n_bins - 1);
    (s.correct ? h.correct : h.incorrect)[bin] += 1;
  }
  return h;
}

EntropyGroupMeans mean_entropy_by_group(const UqAssessment& assessment) {
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (const auto& s : assessment.samples) {
    sum[s.correct ? 1 : 0] += s.entropy;
    count[s.correct ? 1 : 0] += 1;
  }
  EntropyGroupMeans out;
  if (count[1] > 0) out.correct = sum[1] / static_cast<double>(count[1]);
  if (count[0] > 0) out.incorrect = sum[0] / static_cast<double>(count[0]);
  return out;
}

void write_assessment_csv(const UqAssessment& assessment, std::ostream& out) {
  out << "sample_index,p_defect,entropy,predicted,true,certain,correct\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < assessment.samples.size(); ++i) {
    const auto& s = assessment.samples[i];
    out << i << ',' << s.mean_probs(1) << ',' << s.entropy << ',' << int{s.predicted} << ','
        << int{s.truth} << ',' << (s.certain ? 1 : 0) << ',' << (s.correct ? 1 : 0) << '\n';
  }
}

namespace {
constexpr char kEnsembleMagic[4] = {'C', 'G', 'E', '1'};
constexpr std::uint8_t kEnsembleVersion = 1;
}  // namespace

void save_ensemble(const EnsembleModel& model, std::ostream& out) {
  detail::BinaryWriter w(out);
  const auto& c = model.config;
  w.put_bytes(kEnsembleMagic, sizeof kEnsembleMagic);
  w.put(kEnsembleVersion);
  w.put<std::uint64_t>(c.n_members);
  detail::put_sizes(w, c.depth_choices);
  w.put<std::uint64_t>(c.width_ranges.size());
  for (const auto& r : c.width_ranges) {
    w.put<std::uint64_t>(r.low);
    w.put<std::uint64_t>(r.high);
  }
  w.put(c.member_seed_base);
  detail::put_train_config(w, c.train_config);
  w.put(static_cast<std::uint8_t>(c.activation));
  w.put<std::uint8_t>(c.standardize ? 1 : 0);
  detail::put_standardizer(w, model.standardizer);
  w.put<std::uint64_t>(model.members.size());
  for (const auto& m : model.members) detail::put_mlp(w, m);
  if (!out) throw DataError("failed writing ensemble stream");
}

EnsembleModel load_ensemble(std::istream& in) {
  detail::BinaryReader r(in);
  char magic[4];
  r.read_exact(magic, sizeof magic);
  if (!std::equal(magic, magic + 4, kEnsembleMagic)) throw DataError("not a castguard ensemble (bad magic)");
  const auto version = r.get<std::uint8_t>();
  if (version != kEnsembleVersion) throw DataError("unsupported ensemble version " + std::to_string(version));

  EnsembleModel model;
  auto& c = model.config;
  c.n_members = static_cast<std::size_t>(detail::checked_count(r.get<std::uint64_t>()));
  c.depth_choices = detail::get_sizes(r);
  c.width_ranges.resize(detail::checked_count(r.get<std::uint64_t>()));
  for (auto& range : c.width_ranges) {
    range.low = static_cast<std::size_t>(r.get<std::uint64_t>());
    range.high = static_cast<std::size_t>(r.get<std::uint64_t>());
  }
  c.member_seed_base = r.get<std::uint64_t>();
  c.train_config = detail::get_train_config(r);
  c.activation = static_cast<Activation>(r.get<std::uint8_t>());
  c.standardize = r.get<std::uint8_t>() != 0;
  model.standardizer = detail::get_standardizer(r);
  model.members.resize(detail::checked_count(r.get<std::uint64_t>()));
  for (auto& m : model.members) m = detail::get_mlp(r);

  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw DataError(std::string("corrupt ensemble: ") + e.what());
  }
  if (model.members.size() != c.n_members) throw DataError("corrupt ensemble: member count mismatch");
  for (const auto& m : model.members) {
    if (m.input_dim() != model.input_dim()) throw DataError("corrupt ensemble: member input width mismatch");
  }
  return model;
}

}  // namespace castguard
