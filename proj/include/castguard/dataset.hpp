#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace castguard {

/// Row-major binary32 feature storage; one row per sample. Matches the FMX
/// payload layout so reads and writes are straight copies.
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Labels = std::vector<std::uint8_t>;

/// Class labels. Defect is the positive class everywhere in the library.
inline constexpr std::uint8_t kDefect = 1;
inline constexpr std::uint8_t kNonDefect = 0;

/// Labeled feature matrix shared by every module. Immutable once built; the
/// constructor enforces the invariants (matching lengths, labels in {0,1},
/// at least one column, finite values).
class FeatureDataset {
 public:
  FeatureDataset(FeatureMatrix features, Labels labels, std::string source_tag = {});

  const FeatureMatrix& features() const noexcept { return features_; }
  const Labels& labels() const noexcept { return labels_; }
  const std::string& source_tag() const noexcept { return source_tag_; }

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
  std::size_t count(std::uint8_t label) const noexcept;
  bool has_both_classes() const noexcept { return count(kDefect) > 0 && count(kNonDefect) > 0; }

  /// Rows in the given order; indices may repeat (bootstrap).
  FeatureDataset subset(const std::vector<std::size_t>& rows) const;

  friend bool operator==(const FeatureDataset&, const FeatureDataset&);

 private:
  FeatureMatrix features_;
  Labels labels_;
  std::string source_tag_;
};

/// Throws ValidationError if any value is NaN or infinite.
void require_finite(const FeatureMatrix& features);

// --- FMX ----------------------------------------------------------------

/// Header of an FMX file; readable without loading the payload.
struct FmxHeader {
  std::uint8_t version = 1;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  bool has_labels = true;
  std::string source_tag;
};

/// Writes a labeled dataset (has_labels = 1).
void write_fmx(const FeatureDataset& dataset, const std::filesystem::path& path);
/// Writes features only (has_labels = 0), e.g. for inference-time batches.
void write_fmx_unlabeled(const FeatureMatrix& features, const std::string& source_tag,
                         const std::filesystem::path& path);

/// Reads a labeled FMX file. Unlabeled files are rejected; use read_fmx_features.
FeatureDataset read_fmx(const std::filesystem::path& path);
/// Reads the feature payload of any FMX file, labeled or not.
FeatureMatrix read_fmx_features(const std::filesystem::path& path, std::string* source_tag = nullptr);
FmxHeader read_fmx_header(const std::filesystem::path& path);

/// Exact on-disk size of an FMX file with the given shape.
std::uint64_t fmx_file_size(std::uint64_t rows, std::uint64_t cols, bool has_labels,
                            std::size_t tag_bytes);

// --- CSV ----------------------------------------------------------------

FeatureDataset read_csv(const std::filesystem::path& path, const std::string& label_column);

// --- splitting ----------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Index partition only; both lists ascending.
SplitIndices split_indices(const Labels& labels, const SplitSpec& spec);

/// Train/test split. Per-class train count is floor(fraction * n_class + 0.5)
/// when stratified, floor(fraction * n + 0.5) overall otherwise.
std::pair<FeatureDataset, FeatureDataset> split_dataset(const FeatureDataset& dataset,
                                                        const SplitSpec& spec);

// --- synthetic data -----------------------------------------------------

struct SynthSpec {
  std::size_t n_per_class = 200;
  std::size_t dim = 20;
  double class_separation = 8.0;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);

/// Two isotropic Gaussian clusters whose means sit at +/- separation/2 along
/// a seeded random unit direction. Rows 0..n-1 are non-defect, n..2n-1 defect.
/// Every row is drawn from its own derived stream.
FeatureDataset gen_synth(const SynthSpec& spec);

}  // namespace castguard
