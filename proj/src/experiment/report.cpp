#include <algorithm>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "castguard/experiment.hpp"

namespace castguard {
namespace {

using ojson = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string tag_label(const std::string& tag) { return tag.empty() ? "(untagged)" : tag; }

std::vector<std::string> tags_in_order(const std::vector<BenchRow>& rows) {
  std::vector<std::string> tags;
  for (const auto& r : rows) {
    if (std::find(tags.begin(), tags.end(), r.architecture_tag) == tags.end()) tags.push_back(r.architecture_tag);
  }
  return tags;
}

std::vector<ClassifierKind> kinds_in_order(const std::vector<BenchRow>& rows) {
  std::vector<ClassifierKind> kinds;
  for (const auto& r : rows) {
    if (std::find(kinds.begin(), kinds.end(), r.classifier) == kinds.end()) kinds.push_back(r.classifier);
  }
  return kinds;
}

struct Group {
  std::vector<double> accuracy, sensitivity, specificity, auc;
  std::size_t runs = 0;
  std::size_t failed = 0;
};

Group collect(const std::vector<BenchRow>& rows, const std::string& tag, ClassifierKind kind) {
  Group g;
  for (const auto& r : rows) {
    if (r.architecture_tag != tag || r.classifier != kind) continue;
    ++g.runs;
    if (r.status != "ok") ++g.failed;
    if (r.accuracy) g.accuracy.push_back(*r.accuracy);
    if (r.sensitivity) g.sensitivity.push_back(*r.sensitivity);
    if (r.specificity) g.specificity.push_back(*r.specificity);
    if (r.auc) g.auc.push_back(*r.auc);
  }
  return g;
}

ojson summary_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  const RunSummary s = aggregate_runs(values).summary;
  return {{"n", s.n},         {"mean", s.mean}, {"std", s.std}, {"min", s.min},
          {"q1", s.q1},       {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

std::optional<RunSummary> summarize(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return aggregate_runs(values).summary;
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

std::string file_tag(std::string_view tag) {
  std::string out;
  for (const char ch : tag) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                      ch == '-' || ch == '_' || ch == '.';
    out += safe ? ch : '_';
  }
  return out.empty() ? "data" : out;
}

void write_per_run_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "run_index,classifier,architecture_tag,accuracy,sensitivity,specificity,auc,status\n";
  for (const auto& r : rows) {
    out << r.run_index << ',' << to_string(r.classifier) << ',' << csv_field(r.architecture_tag) << ','
        << num(r.accuracy) << ',' << num(r.sensitivity) << ',' << num(r.specificity) << ',' << num(r.auc) << ','
        << csv_field(r.status) << '\n';
  }
}

std::string bench_summary_json(const std::vector<BenchRow>& rows) {
  ojson doc = ojson::array();
  for (const auto& tag : tags_in_order(rows)) {
    ojson classifiers = ojson::object();
    for (const auto kind : kinds_in_order(rows)) {
      const Group g = collect(rows, tag, kind);
      if (g.runs == 0) continue;
      classifiers[std::string(to_string(kind))] = {{"runs", g.runs},
                                                   {"failed_runs", g.failed},
                                                   {"accuracy", summary_json(g.accuracy)},
                                                   {"sensitivity", summary_json(g.sensitivity)},
                                                   {"specificity", summary_json(g.specificity)},
                                                   {"auc", summary_json(g.auc)}};
    }
    doc.push_back({{"architecture_tag", tag}, {"classifiers", classifiers}});
  }
  return doc.dump(2) + "\n";
}

void print_bench_table(const std::vector<BenchRow>& rows, std::ostream& out) {
  char line[256];
  for (const auto& tag : tags_in_order(rows)) {
    out << "== " << tag_label(tag) << " ==\n";
    std::snprintf(line, sizeof line, "%-18s %-16s %-14s %-14s %-14s %s\n", "Classifier", "Accuracy (%)",
                  "Sensitivity", "Specificity", "AUC", "Failed");
    out << line;
    for (const auto kind : kinds_in_order(rows)) {
      const Group g = collect(rows, tag, kind);
      if (g.runs == 0) continue;
      auto cell = [](const std::vector<double>& v, double scale, int digits) {
        const auto s = summarize(v);
        if (!s) return std::string("n/a");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f±%.*f", digits, s->mean * scale, digits, s->std * scale);
        return std::string(buf);
      };
      std::snprintf(line, sizeof line, "%-18s %-17s %-15s %-15s %-15s %zu/%zu\n",
                    std::string(display_name(kind)).c_str(), cell(g.accuracy, 100.0, 1).c_str(),
                    cell(g.sensitivity, 1.0, 3).c_str(), cell(g.specificity, 1.0, 3).c_str(),
                    cell(g.auc, 1.0, 3).c_str(), g.failed, g.runs);
      out << line;
    }
  }
}

void write_sweep_csv(const std::vector<SweepRow>& sweep, std::ostream& out) {
  out << "threshold,tc,tu,fu,fc,uncertainty_accuracy\n";
  for (const auto& r : sweep) {
    out << num(r.threshold) << ',' << r.confusion.tc << ',' << r.confusion.tu << ',' << r.confusion.fu << ','
        << r.confusion.fc << ',' << num(r.uncertainty_accuracy) << '\n';
  }
}

void write_histogram_csv(const EntropyHistogram& h, std::ostream& out) {
  out << "bin_low,bin_high,correct,incorrect\n";
  for (std::size_t i = 0; i < h.correct.size(); ++i) {
    out << num(h.edges[i]) << ',' << num(h.edges[i + 1]) << ',' << h.correct[i] << ',' << h.incorrect[i] << '\n';
  }
}

void write_uq_per_run_csv(const std::vector<UqRun>& runs, std::ostream& out) {
  out << "run_index,architecture_tag,threshold,tc,tu,fu,fc,uncertainty_accuracy,accuracy,"
         "mean_entropy_correct,mean_entropy_incorrect\n";
  for (const auto& r : runs) {
    out << 0 << ',' << csv_field(r.architecture_tag) << ',' << num(r.confusion.threshold) << ',' << r.confusion.tc
        << ',' << r.confusion.tu << ',' << r.confusion.fu << ',' << r.confusion.fc << ','
        << num(r.uncertainty_accuracy) << ',' << num(r.accuracy) << ',' << num(r.group_means.correct) << ','
        << num(r.group_means.incorrect) << '\n';
  }
}

std::string uq_summary_json(const std::vector<UqRun>& runs) {
  ojson doc = ojson::array();
  for (const auto& r : runs) {
    ojson sweep = ojson::array();
    for (const auto& s : r.sweep) {
      sweep.push_back({{"threshold", s.threshold},
                       {"tc", s.confusion.tc},
                       {"tu", s.confusion.tu},
                       {"fu", s.confusion.fu},
                       {"fc", s.confusion.fc},
                       {"uncertainty_accuracy", s.uncertainty_accuracy}});
    }
    doc.push_back({{"architecture_tag", r.architecture_tag},
                   {"members", r.ensemble.members.size()},
                   {"test_samples", r.assessment.size()},
                   {"threshold", r.confusion.threshold},
                   {"tc", r.confusion.tc},
                   {"tu", r.confusion.tu},
                   {"fu", r.confusion.fu},
                   {"fc", r.confusion.fc},
                   {"uncertainty_accuracy", r.uncertainty_accuracy},
                   {"accuracy", r.accuracy},
                   {"mean_entropy_correct", optional_json(r.group_means.correct)},
                   {"mean_entropy_incorrect", optional_json(r.group_means.incorrect)},
                   {"sweep", sweep}});
  }
  return doc.dump(2) + "\n";
}

void print_uq_table(const std::vector<UqRun>& runs, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-9s %6s %6s %6s %6s  %s\n", "Architecture", "Threshold", "TC", "TU",
                "FU", "FC", "Uncertainty accuracy");
  out << line;
  for (const auto& r : runs) {
    std::snprintf(line, sizeof line, "%-20s %-9.2f %6zu %6zu %6zu %6zu  %.1f%%\n",
                  tag_label(r.architecture_tag).c_str(), r.confusion.threshold, r.confusion.tc, r.confusion.tu,
                  r.confusion.fu, r.confusion.fc, 100.0 * r.uncertainty_accuracy);
    out << line;
  }
}

void write_pca_map_csv(const PcaMap& map, std::ostream& out) {
  out << "sample_index";
  for (Eigen::Index j = 0; j < map.coordinates.cols(); ++j) out << ",pc" << j + 1;
  out << ",entropy,predicted,true\n";
  for (std::size_t i = 0; i < map.uq.assessment.size(); ++i) {
    const auto& s = map.uq.assessment.samples[i];
    out << i;
    for (Eigen::Index j = 0; j < map.coordinates.cols(); ++j) {
      out << ',' << num(map.coordinates(static_cast<Eigen::Index>(i), j));
    }
    out << ',' << num(s.entropy) << ',' << int{s.predicted} << ',' << int{s.truth} << '\n';
  }
}

}  // namespace castguard
