// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.
//
//   castguard_acceptance [--only NAME] [--cli PATH] [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "castguard/classifiers.hpp"
#include "castguard/dataset.hpp"
#include "castguard/experiment.hpp"
#include "castguard/metrics.hpp"
#include "castguard/mlp.hpp"
#include "castguard/pca.hpp"
#include "castguard/uq.hpp"

namespace fs = std::filesystem;
using namespace castguard;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path cli;
  fs::path work;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// --- gradient -----------------------------------------------------------

Outcome gradient_check(const Context&) {
  struct Case {
    std::vector<std::size_t> sizes;
    Activation act;
  };
  const std::vector<Case> cases = {
      {{5, 8, 2}, Activation::kTanh},
      {{4, 12, 6, 2}, Activation::kRelu},
      {{7, 10, 9, 5, 2}, Activation::kTanh},
      {{3, 20, 2}, Activation::kRelu},
  };
  constexpr double h = 1e-5;
  double worst = 0.0;
  std::size_t checked = 0;
  std::mt19937_64 gen(2024);
  for (std::size_t c = 0; c < cases.size(); ++c) {
    MlpArchitecture arch{cases[c].sizes, cases[c].act, 100 + c};
    MlpModel model = mlp_init(arch);
    if (model.parameter_count() > 1000) return {false, "architecture over 1k parameters"};
    std::normal_distribution<double> normal;
    // Nonzero biases so ReLU kinks are not sitting at the probe points.
    for (auto& layer : model.layers)
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.1 * normal(gen);
    const Eigen::Index n = 6;
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(arch.layer_sizes.front()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
    Labels y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::uint8_t>(i % 2);

    const MlpGradient grad = mlp_gradient(model, x, y);
    auto check = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = mlp_loss(model, x, y);
      param = saved - h;
      const double down = mlp_loss(model, x, y);
      param = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
      ++checked;
    };
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto& layer = model.layers[l];
      for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
        check(layer.weights.data()[i], grad.layers[l].weights.data()[i]);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(layer.bias(i), grad.layers[l].bias(i));
    }
  }
  return {worst <= 1e-4, fmt("%zu architectures, %zu parameters, max relative error %.3g", cases.size(),
                             checked, worst)};
}

// --- entropy ------------------------------------------------------------

Outcome entropy_values(const Context&) {
  const double half = predictive_entropy(std::vector<double>{0.5, 0.5});
  const double certain = predictive_entropy(std::vector<double>{1.0, 0.0});
  const double worked = predictive_entropy(std::vector<double>{0.7, 0.3});
  const bool ok = half == 1.0 && certain == 0.0 && std::abs(worked - 0.8813) <= 1e-4;
  return {ok, fmt("H(.5,.5)=%.17g H(1,0)=%.17g H(.7,.3)=%.6f", half, certain, worked)};
}

// --- oracle equivalence ---------------------------------------------------

double oracle_entropy(double p0, double p1) {
  double h = 0.0;
  for (const double p : {p0, p1})
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

Outcome oracle_equivalence(const Context&) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = std::uniform_int_distribution<int>(1, 60)(gen);
    const double threshold = std::uniform_real_distribution<double>(0.05, 0.95)(gen);
    Eigen::MatrixXd probs(n, 2);
    Labels truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      // A few exact ties and exact certainties alongside generic values.
      const int mode = std::uniform_int_distribution<int>(0, 9)(gen);
      const double p1 = mode == 0 ? 0.5 : mode == 1 ? 1.0 : unit(gen);
      probs(i, 1) = p1;
      probs(i, 0) = 1.0 - p1;
      truth[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(gen() & 1);
    }
    const UqConfusion c = uq_confusion(assess_probabilities(probs, truth, threshold));
    const double ua = uncertainty_accuracy(c);

    std::size_t tc = 0, tu = 0, fu = 0, fc = 0;
    for (int i = 0; i < n; ++i) {
      const std::uint8_t pred = probs(i, 1) >= probs(i, 0) ? 1 : 0;
      const bool correct = pred == truth[static_cast<std::size_t>(i)];
      const bool certain = oracle_entropy(probs(i, 0), probs(i, 1)) < threshold;
      if (correct && certain) ++tc;
      if (!correct && !certain) ++tu;
      if (correct && !certain) ++fu;
      if (!correct && certain) ++fc;
    }
    const double oracle_ua = static_cast<double>(tc + tu) / static_cast<double>(n);
    if (c.tc != tc || c.tu != tu || c.fu != fu || c.fc != fc || ua != oracle_ua) ++mismatches;
  }

  // Ensemble of identical members reproduces the member bit for bit.
  MlpModel member = mlp_init(MlpArchitecture{{6, 16, 8, 2}, Activation::kRelu, 9});
  std::normal_distribution<double> normal;
  FeatureMatrix x(40, 6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(normal(gen));
  EnsembleModel ensemble;
  ensemble.standardizer = Standardizer::identity(6);
  ensemble.members.assign(7, member);
  const Eigen::MatrixXd mean = ensemble_mean(ensemble, x);
  const Eigen::MatrixXd single = mlp_predict_proba(member, ensemble.standardizer.apply(x));
  const bool bitwise = mean.rows() == single.rows() &&
                       std::memcmp(mean.data(), single.data(), sizeof(double) * mean.size()) == 0;
  return {mismatches == 0 && bitwise,
          fmt("200 assessments, %zu mismatches; duplicated-member mean bitwise equal: %s", mismatches,
              bitwise ? "yes" : "no")};
}

// --- separable benchmark --------------------------------------------------

ExperimentConfig separable_config() {
  ExperimentConfig config;
  config.synth.n_per_class = 200;
  config.synth.dim = 20;
  config.synth.class_separation = 8.0;
  config.synth.noise_sigma = 1.0;
  config.master_seed = 0;
  return config;
}

Outcome separable_benchmark(const Context&) {
  ExperimentConfig config = separable_config();
  config.classifiers = {ClassifierKind::kLinearSvm, ClassifierKind::kMlp};
  config.runs = 10;
  const auto rows = run_bench(config, load_inputs(config));
  double min_acc = 1.0, min_auc = 1.0;
  bool ok = rows.size() == 20;
  for (const auto& r : rows) {
    if (!r.accuracy || !r.auc) {
      ok = false;
      continue;
    }
    min_acc = std::min(min_acc, *r.accuracy);
    min_auc = std::min(min_auc, *r.auc);
  }
  ok = ok && min_acc >= 0.98 && min_auc >= 0.99;
  return {ok, fmt("linear_svm + mlp, 10 runs each: min accuracy %.4f, min AUC %.4f", min_acc, min_auc)};
}

// --- uq sanity ------------------------------------------------------------

Outcome uq_sanity(const Context&) {
  const ExperimentConfig config = separable_config();
  const auto data = load_inputs(config);
  const UqRun run = run_uq(config, data.front());
  const auto& g = run.group_means;
  const std::size_t wrong = run.confusion.tu + run.confusion.fc;
  const bool ua_ok = run.uncertainty_accuracy >= 0.95;
  std::string entropy_part;
  bool entropy_ok = false;
  if (g.correct && g.incorrect) {
    entropy_ok = *g.incorrect > *g.correct;
    entropy_part = fmt("mean entropy incorrect %.4g vs correct %.4g", *g.incorrect, *g.correct);
  } else {
    // Strictly-greater is not established when one group is empty.
    entropy_part = fmt("entropy separation undefined: %zu misclassified of %zu test samples", wrong,
                       run.assessment.size());
  }
  return {ua_ok && entropy_ok,
          fmt("UA %.4f at threshold 0.4 (%s); ", run.uncertainty_accuracy, ua_ok ? "ok" : "low") + entropy_part};
}

// Not a criterion: the same check on overlapping classes, where errors exist.
void uq_overlap_info() {
  ExperimentConfig config = separable_config();
  config.synth.class_separation = 2.0;
  const auto data = load_inputs(config);
  const UqRun run = run_uq(config, data.front());
  const auto& g = run.group_means;
  std::cout << "INFO uq_overlap_separation2: UA " << run.uncertainty_accuracy << ", misclassified "
            << run.confusion.tu + run.confusion.fc << ", mean entropy incorrect "
            << (g.incorrect ? std::to_string(*g.incorrect) : "n/a") << " vs correct "
            << (g.correct ? std::to_string(*g.correct) : "n/a") << "\n";
}

// --- auc oracle -----------------------------------------------------------

Outcome auc_oracle(const Context&) {
  std::mt19937_64 gen(5);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 50)(gen);
    // Coarse grid on half the trials to force ties.
    const int levels = trial % 2 == 0 ? 5 : 1 << 20;
    std::vector<double> scores(static_cast<std::size_t>(n));
    Labels truth(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, levels)(gen) / double(levels);
      truth[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(gen() & 1);
    }
    truth[0] = 0;
    truth[1] = 1;
    std::uint64_t twice_wins = 0, pos = 0, neg = 0;
    for (int i = 0; i < n; ++i) {
      if (truth[static_cast<std::size_t>(i)] != 1) continue;
      ++pos;
      for (int j = 0; j < n; ++j) {
        if (truth[static_cast<std::size_t>(j)] != 0) continue;
        const double a = scores[static_cast<std::size_t>(i)], b = scores[static_cast<std::size_t>(j)];
        twice_wins += a > b ? 2 : a == b ? 1 : 0;
      }
    }
    for (const auto t : truth) neg += t == 0;
    const double brute = static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos * neg));
    if (auc(scores, truth) != brute) ++mismatches;
  }
  return {mismatches == 0, fmt("100 score vectors, %zu mismatches", mismatches)};
}

// --- fmx roundtrip ----------------------------------------------------------

Outcome fmx_roundtrip(const Context& ctx) {
  std::mt19937_64 gen(11);
  const fs::path path = ctx.work / "roundtrip.fmx";
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = std::uniform_int_distribution<int>(0, 40)(gen);
    const auto cols = std::uniform_int_distribution<int>(1, 30)(gen);
    FeatureMatrix x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // Random finite bit patterns: covers subnormals, signed zero, extremes.
      float v;
      do {
        const auto bits = static_cast<std::uint32_t>(gen());
        std::memcpy(&v, &bits, sizeof v);
      } while (!std::isfinite(v));
      x.data()[i] = v;
    }
    Labels y(static_cast<std::size_t>(rows));
    for (auto& l : y) l = static_cast<std::uint8_t>(gen() & 1);
    const std::string tag = trial % 3 == 0 ? "" : "tag-" + std::to_string(trial);
    const FeatureDataset original(x, y, tag);
    write_fmx(original, path);
    const FeatureDataset back = read_fmx(path);
    const bool same = back.features().rows() == rows && back.features().cols() == cols &&
                      std::memcmp(back.features().data(), x.data(), sizeof(float) * x.size()) == 0 &&
                      back.labels() == y && back.source_tag() == tag &&
                      fs::file_size(path) == fmx_file_size(rows, cols, true, tag.size());
    if (!same) ++mismatches;
  }
  fs::remove(path);
  return {mismatches == 0, fmt("100 matrices, %zu mismatches", mismatches)};
}

// --- pca ------------------------------------------------------------------

Outcome pca_properties(const Context&) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;

  // Rank-1 recovery.
  Eigen::VectorXd dir(12);
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = normal(gen);
  dir.normalize();
  Eigen::MatrixXd line(300, 12);
  for (Eigen::Index r = 0; r < line.rows(); ++r) line.row(r) = (3.0 * normal(gen)) * dir.transpose();
  line.rowwise() += Eigen::RowVectorXd::LinSpaced(12, -1.0, 1.0);
  const PcaModel rank1 = pca_fit(line, 1);
  const double cosine = std::abs(rank1.components.row(0).dot(dir));

  // Orthonormality and the reconstruction identity on anisotropic data.
  const Eigen::Index n = 500, p = 40;
  Eigen::MatrixXd data(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < p; ++c) data(r, c) = normal(gen) * (1.0 + 10.0 / (1.0 + c));
  const PcaModel model = pca_fit(data, 5);
  const Eigen::MatrixXd gram = model.components * model.components.transpose();
  const double ortho = (gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd recon = pca_reconstruct(model, pca_transform(model, data));
  const double residual = (data - recon).squaredNorm() / static_cast<double>(n - 1);
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const double total = centered.squaredNorm() / static_cast<double>(n - 1);
  const double expected = total - model.explained_variance.sum();
  const double identity_err = std::abs(residual - expected) / expected;

  const bool ok = cosine > 1 - 1e-6 && ortho <= 1e-8 && identity_err <= 1e-6;
  return {ok, fmt("rank-1 |cos| %.17g, orthonormality %.3g, reconstruction identity rel %.3g", cosine,
                  ortho, identity_err)};
}

// --- cli determinism --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> output_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".fmx" || ext == ".json"))
      files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome cli_determinism(const Context& ctx) {
  if (ctx.cli.empty()) return {false, "no --cli binary given"};
  const std::vector<std::string> invocations = {
      "bench --runs 3 --seed 42",
      "uq --seed 42 --members 4",
      "pca-map --seed 42 --members 4 --n-per-class 50",
  };
  std::size_t compared = 0;
  for (std::size_t i = 0; i < invocations.size(); ++i) {
    std::map<std::string, std::string> outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      // Same directory both times: config-echo.json records the output path.
      const fs::path out = ctx.work / ("cli" + std::to_string(i));
      fs::remove_all(out);
      const std::string cmd =
          "\"" + ctx.cli.string() + "\" " + invocations[i] + " --out \"" + out.string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: castguard " + invocations[i]};
      outputs[rep] = output_files(out);
      fs::remove_all(out);
    }
    if (outputs[0].empty()) return {false, "no output files: castguard " + invocations[i]};
    if (outputs[0] != outputs[1]) return {false, "outputs differ: castguard " + invocations[i]};
    compared += outputs[0].size();
  }
  // synth writes a single file.
  std::string synth[2];
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = ctx.work / "synth.fmx";
    const std::string cmd = "\"" + ctx.cli.string() + "\" synth --seed 42 --out \"" + out.string() + "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "command failed: castguard synth"};
    synth[rep] = slurp(out);
    fs::remove(out);
  }
  if (synth[0].empty() || synth[0] != synth[1]) return {false, "outputs differ: castguard synth"};
  return {true, fmt("bench, uq, pca-map, synth run twice: %zu files byte-identical", compared + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i + 1 < argc && arg == "--only") only = argv[++i];
    else if (i + 1 < argc && arg == "--cli") ctx.cli = argv[++i];
    else if (i + 1 < argc && arg == "--work") ctx.work = argv[++i];
    else {
      std::cerr << "usage: castguard_acceptance [--only NAME] [--cli PATH] [--work DIR]\n";
      return 2;
    }
  }
  if (ctx.work.empty()) ctx.work = fs::temp_directory_path() / "castguard-acceptance";
  ctx.work /= only.empty() ? "all" : only;
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria = {
      {"gradient_check", gradient_check},
      {"entropy_values", entropy_values},
      {"oracle_equivalence", oracle_equivalence},
      {"separable_benchmark", separable_benchmark},
      {"uq_sanity", uq_sanity},
      {"auc_oracle", auc_oracle},
      {"fmx_roundtrip", fmx_roundtrip},
      {"pca_properties", pca_properties},
      {"cli_determinism", cli_determinism},
  };

  int failures = 0, selected = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    ++selected;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" [%.1fs]", secs) << std::endl;
    failures += !o.pass;
    if (name == "uq_sanity") {
      try {
        uq_overlap_info();
      } catch (const std::exception& e) {
        std::cout << "INFO uq_overlap_separation2: exception: " << e.what() << "\n";
      }
    }
  }
  if (selected == 0) {
    std::cerr << "unknown criterion: " << only << "\n";
    return 2;
  }
  fs::remove_all(ctx.work);
  return failures == 0 ? 0 : 1;
}
