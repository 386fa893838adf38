#include <algorithm>
#include <cmath>
#include <numeric>

#include "castguard/dataset.hpp"
#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {
namespace {

std::size_t rounded_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
}

}  // namespace

SplitIndices split_indices(const Labels& labels, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
  Rng rng = make_rng(spec.seed);
  SplitIndices out;

  auto take = [&](std::vector<std::size_t> pool) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n_train = rounded_share(spec.train_fraction, pool.size());
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
  };

  if (spec.stratified) {
    for (std::uint8_t cls : {kNonDefect, kDefect}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == cls) pool.push_back(i);
      }
      if (pool.size() < 2) {
        throw ValidationError("stratified split needs at least 2 samples of class " +
                              std::to_string(cls) + ", found " + std::to_string(pool.size()));
      }
      take(std::move(pool));
    }
  } else {
    std::vector<std::size_t> pool(labels.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    take(std::move(pool));
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::pair<FeatureDataset, FeatureDataset> split_dataset(const FeatureDataset& dataset,
                                                        const SplitSpec& spec) {
  const SplitIndices idx = split_indices(dataset.labels(), spec);
  return {dataset.subset(idx.train), dataset.subset(idx.test)};
}

}  // namespace castguard
