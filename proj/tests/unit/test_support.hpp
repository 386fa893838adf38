#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "castguard/dataset.hpp"

namespace castguard::test {

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "castguard-unit" /
             (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline FeatureDataset make_dataset(std::initializer_list<std::initializer_list<float>> rows, Labels labels) {
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const float v : row) x(r, c++) = v;
    ++r;
  }
  return FeatureDataset(std::move(x), std::move(labels));
}

inline FeatureDataset separable_synth(std::size_t n_per_class = 50, std::size_t dim = 10, std::uint64_t seed = 1) {
  SynthSpec s;
  s.n_per_class = n_per_class;
  s.dim = dim;
  s.class_separation = 8.0;
  s.noise_sigma = 1.0;
  s.seed = seed;
  return gen_synth(s);
}

}  // namespace castguard::test
