#include <cmath>
#include <random>

#include "castguard/dataset.hpp"
#include "castguard/error.hpp"
#include "castguard/random.hpp"

namespace castguard {

void validate(const SynthSpec& spec) {
  if (spec.dim < 2) throw ValidationError("synth dim must be >= 2, got " + std::to_string(spec.dim));
  if (spec.n_per_class < 1) throw ValidationError("synth n_per_class must be >= 1");
  if (!(spec.class_separation >= 0.0) || !std::isfinite(spec.class_separation)) {
    throw ValidationError("synth class_separation must be a finite nonnegative number");
  }
  if (!(spec.noise_sigma > 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw ValidationError("synth noise_sigma must be a finite positive number");
  }
}

FeatureDataset gen_synth(const SynthSpec& spec) {
  validate(spec);
  const auto dim = static_cast<Eigen::Index>(spec.dim);

  Eigen::VectorXd direction(dim);
  {
    Rng rng = make_rng(derive_seed(spec.seed, 0));
    std::normal_distribution<double> normal;
    do {
      for (Eigen::Index j = 0; j < dim; ++j) direction(j) = normal(rng);
    } while (direction.norm() == 0.0);
    direction.normalize();
  }

  const std::size_t n = spec.n_per_class;
  FeatureMatrix features(static_cast<Eigen::Index>(2 * n), dim);
  Labels labels(2 * n);
  for (std::size_t row = 0; row < 2 * n; ++row) {
    const std::uint8_t cls = row < n ? kNonDefect : kDefect;
    const double side = cls == kDefect ? 0.5 : -0.5;
    Rng rng = make_rng(derive_seed(spec.seed, 1 + row));
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double v = side * spec.class_separation * direction(j) + noise(rng);
      features(static_cast<Eigen::Index>(row), j) = static_cast<float>(v);
    }
    labels[row] = cls;
  }
  return FeatureDataset(std::move(features), std::move(labels), "synth");
}

}  // namespace castguard
