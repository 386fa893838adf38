#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace castguard {

/// Counts with defect as the positive class.
struct BinaryConfusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

BinaryConfusion binary_confusion(std::span<const std::uint8_t> predictions,
                                 std::span<const std::uint8_t> truths);

/// Ratios with a zero denominator are left empty rather than reported as 0.
struct BinaryMetrics {
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
};

BinaryMetrics binary_metrics(std::span<const std::uint8_t> predictions,
                             std::span<const std::uint8_t> truths);
BinaryMetrics binary_metrics(const BinaryConfusion& confusion);

/// Mann-Whitney estimate of P(score_pos > score_neg) + P(equal) / 2, from
/// mid-rank sums. Throws ValidationError when only one class is present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> truths);

struct RunSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator; 0 for a single run
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct RunDistribution {
  std::string metric;
  std::vector<double> values;
  RunSummary summary;
};

/// Linear-interpolation quantile of ascending data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

RunDistribution aggregate_runs(std::vector<double> values, std::string metric = {});

}  // namespace castguard
