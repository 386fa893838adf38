#include "castguard/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "castguard/error.hpp"

namespace castguard {

void require_finite(const FeatureMatrix& features) {
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (!std::isfinite(features(r, c))) {
        throw ValidationError("non-finite feature value at row " + std::to_string(r) +
                              ", column " + std::to_string(c));
      }
    }
  }
}

FeatureDataset::FeatureDataset(FeatureMatrix features, Labels labels, std::string source_tag)
    : features_(std::move(features)), labels_(std::move(labels)), source_tag_(std::move(source_tag)) {
  if (features_.cols() < 1) {
    throw ValidationError("feature matrix must have at least one column");
  }
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw ValidationError("label count " + std::to_string(labels_.size()) +
                          " does not match row count " + std::to_string(features_.rows()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] > 1) {
      throw ValidationError("label at row " + std::to_string(i) + " is " +
                            std::to_string(labels_[i]) + ", expected 0 or 1");
    }
  }
  require_finite(features_);
}

std::size_t FeatureDataset::count(std::uint8_t label) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

FeatureDataset FeatureDataset::subset(const std::vector<std::size_t>& rows) const {
  FeatureMatrix sub(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Labels sub_labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= labels_.size()) throw ValidationError("subset row index out of range");
    sub.row(static_cast<Eigen::Index>(i)) = features_.row(static_cast<Eigen::Index>(rows[i]));
    sub_labels[i] = labels_[rows[i]];
  }
  return FeatureDataset(std::move(sub), std::move(sub_labels), source_tag_);
}

bool operator==(const FeatureDataset& a, const FeatureDataset& b) {
  if (a.labels_ != b.labels_ || a.source_tag_ != b.source_tag_) return false;
  if (a.features_.rows() != b.features_.rows() || a.features_.cols() != b.features_.cols()) {
    return false;
  }
  // Bitwise comparison so that -0.0 vs 0.0 counts as a difference.
  return std::equal(a.features_.data(), a.features_.data() + a.features_.size(),
                    b.features_.data(), [](float x, float y) {
                      return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
                    });
}

}  // namespace castguard
