#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "castguard/error.hpp"
#include "castguard/metrics.hpp"

namespace castguard {
namespace {

using Labels = std::vector<std::uint8_t>;

TEST(BinaryMetrics, AllCorrect) {
  const Labels t{1, 0, 1, 0};
  const auto m = binary_metrics(t, t);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.sensitivity, 1.0);
  EXPECT_EQ(m.specificity, 1.0);
}

TEST(BinaryMetrics, ConstantPredictorsOnSixtyForty) {
  Labels truth(100, 0);
  std::fill(truth.begin(), truth.begin() + 60, 1);
  const auto defect = binary_metrics(Labels(100, 1), truth);
  EXPECT_DOUBLE_EQ(defect.accuracy, 0.6);
  EXPECT_EQ(defect.sensitivity, 1.0);
  EXPECT_EQ(defect.specificity, 0.0);
  const auto ok = binary_metrics(Labels(100, 0), truth);
  EXPECT_DOUBLE_EQ(ok.accuracy, 0.4);
  EXPECT_EQ(ok.sensitivity, 0.0);
  EXPECT_EQ(ok.specificity, 1.0);
}

TEST(BinaryMetrics, UndefinedRatiosAreEmptyNotZero) {
  const auto m = binary_metrics(Labels{1, 0}, Labels{1, 1});
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.sensitivity, 0.5);
  EXPECT_FALSE(m.specificity.has_value());
  EXPECT_THROW(binary_metrics(Labels{1}, Labels{1, 0}), ValidationError);
  EXPECT_THROW(binary_metrics(Labels{}, Labels{}), ValidationError);
}

TEST(BinaryMetrics, AccuracyDecomposes) {
  std::mt19937_64 gen(1);
  Labels p(97), t(97);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = gen() & 1;
    t[i] = gen() & 1;
  }
  const auto c = binary_confusion(p, t);
  const auto m = binary_metrics(p, t);
  const double n_pos = static_cast<double>(c.tp + c.fn), n_neg = static_cast<double>(c.tn + c.fp);
  EXPECT_NEAR(m.accuracy, (*m.sensitivity * n_pos + *m.specificity * n_neg) / 97.0, 1e-15);
  EXPECT_EQ(c.total(), 97u);
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, Labels{0, 0, 1, 1}), 0.75);
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, Labels{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auc(std::vector<double>(6, 0.3), Labels{0, 1, 0, 1, 1, 0}), 0.5);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, Labels{1, 1}), ValidationError);
}

TEST(Auc, ComplementAndMonotoneInvariance) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(40), neg(40), warped(40);
    Labels t(40);
    for (int i = 0; i < 40; ++i) {
      t[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i % 3 == 0);
      s[static_cast<std::size_t>(i)] = normal(gen) + t[static_cast<std::size_t>(i)];
      neg[static_cast<std::size_t>(i)] = -s[static_cast<std::size_t>(i)];
      warped[static_cast<std::size_t>(i)] = std::exp(3 * s[static_cast<std::size_t>(i)]);
    }
    EXPECT_NEAR(auc(s, t) + auc(neg, t), 1.0, 1e-15);
    EXPECT_EQ(auc(s, t), auc(warped, t));
  }
}

TEST(AggregateRuns, Examples) {
  const auto ones = aggregate_runs({1, 1, 1}, "accuracy").summary;
  EXPECT_EQ(ones.mean, 1.0);
  EXPECT_EQ(ones.std, 0.0);
  const auto pair = aggregate_runs({0, 1}).summary;
  EXPECT_EQ(pair.mean, 0.5);
  EXPECT_NEAR(pair.std, 0.7071, 1e-4);
  const auto four = aggregate_runs({4, 1, 3, 2}).summary;
  EXPECT_EQ(four.median, 2.5);
  EXPECT_EQ(four.min, 1.0);
  EXPECT_EQ(four.max, 4.0);
  EXPECT_EQ(four.q1, 1.75);
  EXPECT_EQ(four.q3, 3.25);
  EXPECT_EQ(aggregate_runs({7}).summary.std, 0.0);
  EXPECT_THROW(aggregate_runs({}), ValidationError);
}

}  // namespace
}  // namespace castguard
