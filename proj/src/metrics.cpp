#include "castguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "castguard/dataset.hpp"
#include "castguard/error.hpp"

namespace castguard {

BinaryConfusion binary_confusion(std::span<const std::uint8_t> predictions,
                                 std::span<const std::uint8_t> truths) {
  if (predictions.size() != truths.size()) {
    throw ValidationError("predictions (" + std::to_string(predictions.size()) + ") and truths (" +
                          std::to_string(truths.size()) + ") differ in length");
  }
  if (truths.empty()) throw ValidationError("metrics over an empty sample");
  BinaryConfusion c;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (predictions[i] > 1 || truths[i] > 1) throw ValidationError("labels must be 0 or 1");
    const bool pred = predictions[i] == kDefect;
    const bool truth = truths[i] == kDefect;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

BinaryMetrics binary_metrics(const BinaryConfusion& c) {
  if (c.total() == 0) throw ValidationError("metrics over an empty sample");
  BinaryMetrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fn > 0) m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.tn + c.fp > 0) m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return m;
}

BinaryMetrics binary_metrics(std::span<const std::uint8_t> predictions,
                             std::span<const std::uint8_t> truths) {
  return binary_metrics(binary_confusion(predictions, truths));
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> truths) {
  if (scores.size() != truths.size()) throw ValidationError("scores and truths differ in length");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truths[i] > 1) throw ValidationError("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw ValidationError("AUC scores contain NaN");
    n_pos += truths[i] == kDefect ? 1 : 0;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("AUC is undefined when only one class is present");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of (1-based) mid-ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo + 1;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double mid_rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (truths[order[k]] == kDefect) rank_sum += mid_rank;
    }
    lo = hi;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RunDistribution aggregate_runs(std::vector<double> values, std::string metric) {
  if (values.empty()) throw ValidationError("cannot aggregate an empty list of runs");
  for (const double v : values) {
    if (!std::isfinite(v)) throw ValidationError("run values must be finite");
  }
  RunDistribution out;
  out.metric = std::move(metric);
  RunSummary& s = out.summary;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  out.values = std::move(values);
  return out;
}

}  // namespace castguard
