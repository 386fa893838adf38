#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "castguard/dataset.hpp"
#include "castguard/mlp.hpp"
#include "castguard/standardize.hpp"

namespace castguard {

/// Inclusive integer range for a hidden-layer width.
struct WidthRange {
  std::size_t low = 0;
  std::size_t high = 0;
};

inline constexpr double kDefaultThreshold = 0.4;

/// Deep-ensemble settings. Member i samples its depth from depth_choices and
/// the width of hidden layer j from width_ranges[j], all from seed
/// member_seed_base + i. Initialization and shuffling seeds derive from the
/// same member seed, so train_config.shuffle_seed is not used by members.
struct EnsembleConfig {
  std::size_t n_members = 10;
  std::vector<std::size_t> depth_choices{2, 3};
  std::vector<WidthRange> width_ranges{{256, 512}, {128, 256}, {64, 128}};
  std::uint64_t member_seed_base = 0;
  TrainConfig train_config;
  Activation activation = Activation::kRelu;
  bool standardize = true;

  void validate() const;
};

struct EnsembleModel {
  EnsembleConfig config;
  Standardizer standardizer;
  std::vector<MlpModel> members;

  std::size_t input_dim() const { return standardizer.dim(); }
};

/// Architecture of member `index` for the given input width.
MlpArchitecture sample_member_architecture(const EnsembleConfig& config, std::size_t index,
                                           std::size_t input_dim);

/// Trains every member independently on the whole training set. Members may
/// train concurrently (`jobs`); the result does not depend on it.
EnsembleModel ensemble_train(const EnsembleConfig& config, const FeatureDataset& train,
                             std::size_t jobs = 1);

/// Running mean of member distributions. Identical members give back the
/// member's distribution bit for bit.
Eigen::VectorXd mean_probabilities(std::span<const Eigen::VectorXd> member_outputs);

/// Ensemble predictive distribution for one raw feature row.
Eigen::VectorXd ensemble_mean(const EnsembleModel& model, std::span<const float> x);
/// n x 2 ensemble predictive distributions for raw feature rows.
Eigen::MatrixXd ensemble_mean(const EnsembleModel& model, const FeatureMatrix& features);

/// -sum p log2 p with 0 log 0 = 0. Throws ValidationError when p is off the
/// simplex by more than 1e-6.
double predictive_entropy(std::span<const double> p);
double predictive_entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

/// Argmax of a two-class distribution; an exact tie goes to defect.
std::uint8_t argmax_label(const Eigen::Ref<const Eigen::VectorXd>& p);

struct SampleAssessment {
  Eigen::Vector2d mean_probs;
  double entropy = 0.0;
  std::uint8_t predicted = 0;
  std::uint8_t truth = 0;
  bool certain = false;  // entropy < threshold
  bool correct = false;
};

struct UqAssessment {
  double threshold = kDefaultThreshold;
  std::vector<SampleAssessment> samples;

  std::size_t size() const noexcept { return samples.size(); }
};

UqAssessment assess(const EnsembleModel& model, const FeatureDataset& test,
                    double threshold = kDefaultThreshold);
/// Same decision rule from precomputed n x 2 distributions.
UqAssessment assess_probabilities(const Eigen::MatrixXd& probabilities, const Labels& truths,
                                  double threshold = kDefaultThreshold);

struct UqConfusion {
  std::size_t tc = 0;  // correct, certain
  std::size_t tu = 0;  // incorrect, uncertain
  std::size_t fu = 0;  // correct, uncertain
  std::size_t fc = 0;  // incorrect, certain
  double threshold = kDefaultThreshold;

  std::size_t total() const noexcept { return tc + tu + fu + fc; }
  friend bool operator==(const UqConfusion&, const UqConfusion&) = default;
};

UqConfusion uq_confusion(const UqAssessment& assessment);

/// (TU + TC) / (TU + TC + FU + FC). Throws on an empty confusion.
double uncertainty_accuracy(const UqConfusion& confusion);

struct SweepRow {
  double threshold = 0.0;
  UqConfusion confusion;
  double uncertainty_accuracy = 0.0;
};

/// 0.1, 0.2, ..., 0.9
std::vector<double> default_threshold_grid();

/// Re-thresholds fixed entropies. Thresholds must be ascending within [0, 1].
std::vector<SweepRow> threshold_sweep(std::span<const double> entropies,
                                      const std::vector<bool>& correct,
                                      std::span<const double> thresholds);
std::vector<SweepRow> threshold_sweep(const UqAssessment& assessment,
                                      std::span<const double> thresholds);

/// Entropy counts over n_bins equal bins of [0, 1], split by correctness.
/// An entropy of exactly 1 lands in the last bin.
struct EntropyHistogram {
  std::vector<double> edges;  // n_bins + 1
  std::vector<std::size_t> correct;
  std::vector<std::size_t> incorrect;
};

EntropyHistogram entropy_histogram(const UqAssessment& assessment, std::size_t n_bins);

struct EntropyGroupMeans {
  std::optional<double> correct;
  std::optional<double> incorrect;
};
EntropyGroupMeans mean_entropy_by_group(const UqAssessment& assessment);

/// CSV columns: sample_index,p_defect,entropy,predicted,true,certain,correct
void write_assessment_csv(const UqAssessment& assessment, std::ostream& out);

/// Binary blob: "CGE1", version, config, standardizer, members.
void save_ensemble(const EnsembleModel& model, std::ostream& out);
EnsembleModel load_ensemble(std::istream& in);

}  // namespace castguard
