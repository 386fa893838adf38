// Python bindings for the castguard core: data I/O, classifiers, metrics,
// the deep ensemble and PCA.

#include <fstream>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "castguard/classifiers.hpp"
#include "castguard/dataset.hpp"
#include "castguard/error.hpp"
#include "castguard/metrics.hpp"
#include "castguard/pca.hpp"
#include "castguard/uq.hpp"

namespace py = pybind11;
namespace cg = castguard;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

cg::Labels to_labels(const U8Array& a) {
  if (a.ndim() != 1) throw cg::ValidationError("labels must be one-dimensional");
  return cg::Labels(a.data(), a.data() + a.size());
}

std::vector<double> to_doubles(const F64Array& a) {
  if (a.ndim() != 1) throw cg::ValidationError("expected a one-dimensional array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

U8Array labels_array(const cg::Labels& labels) {
  U8Array out(static_cast<py::ssize_t>(labels.size()));
  std::copy(labels.begin(), labels.end(), out.mutable_data());
  return out;
}

py::object optional_value(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict confusion_dict(const cg::UqConfusion& c) {
  py::dict d;
  d["tc"] = c.tc;
  d["tu"] = c.tu;
  d["fu"] = c.fu;
  d["fc"] = c.fc;
  d["threshold"] = c.threshold;
  return d;
}

cg::UqConfusion confusion_from(std::size_t tc, std::size_t tu, std::size_t fu, std::size_t fc) {
  cg::UqConfusion c;
  c.tc = tc;
  c.tu = tu;
  c.fu = fu;
  c.fc = fc;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "castguard core: classifiers, deep-ensemble uncertainty, metrics and PCA";

  auto base = py::register_exception<cg::Error>(m, "Error");
  py::register_exception<cg::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<cg::DataError>(m, "DataError", base.ptr());
  py::register_exception<cg::TrainingError>(m, "TrainingError", base.ptr());

  // --- data ---------------------------------------------------------------
  py::class_<cg::FeatureDataset>(m, "FeatureDataset")
      .def(py::init([](const cg::FeatureMatrix& features, const U8Array& labels, std::string tag) {
             return cg::FeatureDataset(features, to_labels(labels), std::move(tag));
           }),
           py::arg("features"), py::arg("labels"), py::arg("source_tag") = "")
      .def_property_readonly("features", [](const cg::FeatureDataset& d) { return d.features(); })
      .def_property_readonly("labels", [](const cg::FeatureDataset& d) { return labels_array(d.labels()); })
      .def_property_readonly("source_tag", &cg::FeatureDataset::source_tag)
      .def_property_readonly("feature_dim", &cg::FeatureDataset::feature_dim)
      .def("count", &cg::FeatureDataset::count, py::arg("label"))
      .def("subset", &cg::FeatureDataset::subset, py::arg("rows"))
      .def("__len__", &cg::FeatureDataset::size)
      .def("__eq__", [](const cg::FeatureDataset& a, const cg::FeatureDataset& b) { return a == b; })
      .def("__repr__", [](const cg::FeatureDataset& d) {
        return "FeatureDataset(rows=" + std::to_string(d.size()) + ", cols=" + std::to_string(d.feature_dim()) +
               ", tag='" + d.source_tag() + "')";
      });

  m.def("read_fmx", &cg::read_fmx, py::arg("path"));
  m.def("write_fmx", &cg::write_fmx, py::arg("dataset"), py::arg("path"));
  m.def("read_fmx_header", [](const std::filesystem::path& p) {
    const auto h = cg::read_fmx_header(p);
    py::dict d;
    d["version"] = h.version;
    d["rows"] = h.rows;
    d["cols"] = h.cols;
    d["has_labels"] = h.has_labels;
    d["source_tag"] = h.source_tag;
    return d;
  }, py::arg("path"));
  m.def("fmx_file_size", &cg::fmx_file_size, py::arg("rows"), py::arg("cols"), py::arg("has_labels"),
        py::arg("tag_bytes"));
  m.def("read_csv", &cg::read_csv, py::arg("path"), py::arg("label_column") = "label");

  m.def("gen_synth", [](std::size_t n_per_class, std::size_t dim, double separation, double sigma, std::uint64_t seed) {
    cg::SynthSpec s;
    s.n_per_class = n_per_class;
    s.dim = dim;
    s.class_separation = separation;
    s.noise_sigma = sigma;
    s.seed = seed;
    return cg::gen_synth(s);
  }, py::arg("n_per_class") = 200, py::arg("dim") = 20, py::arg("separation") = 8.0, py::arg("sigma") = 1.0,
     py::arg("seed") = 0);

  m.def("split_dataset", [](const cg::FeatureDataset& d, double train_fraction, std::uint64_t seed, bool stratified) {
    cg::SplitSpec s;
    s.train_fraction = train_fraction;
    s.seed = seed;
    s.stratified = stratified;
    return cg::split_dataset(d, s);
  }, py::arg("dataset"), py::arg("train_fraction") = 0.75, py::arg("seed") = 0, py::arg("stratified") = true);

  // --- classifiers --------------------------------------------------------
  m.attr("CLASSIFIERS") = [] {
    py::list names;
    for (const auto k : cg::kAllClassifierKinds) names.append(std::string(cg::to_string(k)));
    return names;
  }();

  py::class_<cg::TrainedModel, std::shared_ptr<cg::TrainedModel>>(m, "TrainedModel")
      .def_property_readonly("kind", [](const cg::TrainedModel& t) { return std::string(cg::to_string(t.kind())); })
      .def_property_readonly("feature_dim", &cg::TrainedModel::feature_dim)
      .def_property_readonly("decision_point", &cg::TrainedModel::decision_point)
      .def_property_readonly("seed", [](const cg::TrainedModel& t) { return t.spec().seed; })
      .def("score", &cg::TrainedModel::score, py::arg("features"))
      .def("predict", [](const cg::TrainedModel& t, const cg::FeatureMatrix& x) { return labels_array(t.predict(x)); },
           py::arg("features"))
      .def("to_bytes", [](const cg::TrainedModel& t) {
        std::ostringstream out(std::ios::binary);
        cg::save_model(t, out);
        return py::bytes(out.str());
      });

  m.def("fit", [](const std::string& kind, const cg::FeatureDataset& train, std::uint64_t seed) {
    const auto spec = cg::ClassifierSpec::defaults(cg::parse_classifier_kind(kind), seed);
    return std::shared_ptr<cg::TrainedModel>(cg::fit(spec, train));
  }, py::arg("kind"), py::arg("train"), py::arg("seed") = 0, "Fit a classifier with default hyperparameters.");
  m.def("load_model", [](const py::bytes& blob) {
    std::istringstream in(std::string(blob), std::ios::binary);
    return std::shared_ptr<cg::TrainedModel>(cg::load_model(in));
  }, py::arg("blob"));

  // --- metrics ------------------------------------------------------------
  m.def("binary_metrics", [](const U8Array& pred, const U8Array& truth) {
    const auto p = to_labels(pred);
    const auto t = to_labels(truth);
    const auto r = cg::binary_metrics(p, t);
    py::dict d;
    d["accuracy"] = r.accuracy;
    d["sensitivity"] = optional_value(r.sensitivity);
    d["specificity"] = optional_value(r.specificity);
    return d;
  }, py::arg("predictions"), py::arg("truths"));
  m.def("auc", [](const F64Array& scores, const U8Array& truths) {
    return cg::auc(to_doubles(scores), to_labels(truths));
  }, py::arg("scores"), py::arg("truths"));
  m.def("aggregate_runs", [](const F64Array& values) {
    const auto s = cg::aggregate_runs(to_doubles(values)).summary;
    py::dict d;
    d["n"] = s.n;
    d["mean"] = s.mean;
    d["std"] = s.std;
    d["min"] = s.min;
    d["q1"] = s.q1;
    d["median"] = s.median;
    d["q3"] = s.q3;
    d["max"] = s.max;
    return d;
  }, py::arg("values"));

  // --- uncertainty --------------------------------------------------------
  m.def("predictive_entropy", [](const F64Array& p) { return cg::predictive_entropy(to_doubles(p)); },
        py::arg("p"));
  m.def("uncertainty_accuracy", [](std::size_t tc, std::size_t tu, std::size_t fu, std::size_t fc) {
    return cg::uncertainty_accuracy(confusion_from(tc, tu, fu, fc));
  }, py::arg("tc"), py::arg("tu"), py::arg("fu"), py::arg("fc"));
  m.def("threshold_sweep", [](const F64Array& entropies, const std::vector<bool>& correct,
                              const std::vector<double>& thresholds) {
    py::list rows;
    for (const auto& r : cg::threshold_sweep(to_doubles(entropies), correct, thresholds)) {
      py::dict d = confusion_dict(r.confusion);
      d["uncertainty_accuracy"] = r.uncertainty_accuracy;
      rows.append(d);
    }
    return rows;
  }, py::arg("entropies"), py::arg("correct"), py::arg("thresholds") = cg::default_threshold_grid());

  py::class_<cg::EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init<>())
      .def_readwrite("n_members", &cg::EnsembleConfig::n_members)
      .def_readwrite("depth_choices", &cg::EnsembleConfig::depth_choices)
      .def_property("width_ranges",
                    [](const cg::EnsembleConfig& c) {
                      std::vector<std::pair<std::size_t, std::size_t>> out;
                      for (const auto& r : c.width_ranges) out.emplace_back(r.low, r.high);
                      return out;
                    },
                    [](cg::EnsembleConfig& c, const std::vector<std::pair<std::size_t, std::size_t>>& v) {
                      c.width_ranges.clear();
                      for (const auto& [lo, hi] : v) c.width_ranges.push_back({lo, hi});
                    })
      .def_readwrite("member_seed_base", &cg::EnsembleConfig::member_seed_base)
      .def_property("epochs", [](const cg::EnsembleConfig& c) { return c.train_config.epochs; },
                    [](cg::EnsembleConfig& c, std::size_t v) { c.train_config.epochs = v; })
      .def_property("batch_size", [](const cg::EnsembleConfig& c) { return c.train_config.batch_size; },
                    [](cg::EnsembleConfig& c, std::size_t v) { c.train_config.batch_size = v; })
      .def_property("learning_rate", [](const cg::EnsembleConfig& c) { return c.train_config.learning_rate; },
                    [](cg::EnsembleConfig& c, double v) { c.train_config.learning_rate = v; });

  py::class_<cg::EnsembleModel>(m, "EnsembleModel")
      .def_property_readonly("n_members", [](const cg::EnsembleModel& e) { return e.members.size(); })
      .def_property_readonly("input_dim", &cg::EnsembleModel::input_dim)
      .def_property_readonly("member_layer_sizes", [](const cg::EnsembleModel& e) {
        std::vector<std::vector<std::size_t>> out;
        for (const auto& mem : e.members) out.push_back(mem.architecture.layer_sizes);
        return out;
      })
      .def("mean", [](const cg::EnsembleModel& e, const cg::FeatureMatrix& x) { return cg::ensemble_mean(e, x); },
           py::arg("features"), "n x 2 mean predictive distribution")
      .def("to_bytes", [](const cg::EnsembleModel& e) {
        std::ostringstream out(std::ios::binary);
        cg::save_ensemble(e, out);
        return py::bytes(out.str());
      });

  m.def("ensemble_train", &cg::ensemble_train, py::arg("config"), py::arg("train"), py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("load_ensemble", [](const py::bytes& blob) {
    std::istringstream in(std::string(blob), std::ios::binary);
    return cg::load_ensemble(in);
  }, py::arg("blob"));

  m.def("assess", [](const cg::EnsembleModel& e, const cg::FeatureDataset& test, double threshold) {
    const auto a = cg::assess(e, test, threshold);
    const auto n = static_cast<py::ssize_t>(a.size());
    py::array_t<double> p_defect(n), entropy(n);
    U8Array predicted(n), truth(n);
    py::array_t<bool> certain(n), correct(n);
    for (py::ssize_t i = 0; i < n; ++i) {
      const auto& s = a.samples[static_cast<std::size_t>(i)];
      p_defect.mutable_at(i) = s.mean_probs(1);
      entropy.mutable_at(i) = s.entropy;
      predicted.mutable_at(i) = s.predicted;
      truth.mutable_at(i) = s.truth;
      certain.mutable_at(i) = s.certain;
      correct.mutable_at(i) = s.correct;
    }
    const auto c = cg::uq_confusion(a);
    py::dict d;
    d["p_defect"] = p_defect;
    d["entropy"] = entropy;
    d["predicted"] = predicted;
    d["true"] = truth;
    d["certain"] = certain;
    d["correct"] = correct;
    d["confusion"] = confusion_dict(c);
    d["uncertainty_accuracy"] = cg::uncertainty_accuracy(c);
    return d;
  }, py::arg("ensemble"), py::arg("test"), py::arg("threshold") = cg::kDefaultThreshold);

  // --- pca ----------------------------------------------------------------
  py::class_<cg::PcaModel>(m, "PcaModel")
      .def_readonly("mean", &cg::PcaModel::mean)
      .def_readonly("components", &cg::PcaModel::components)
      .def_readonly("explained_variance", &cg::PcaModel::explained_variance)
      .def_readonly("total_variance", &cg::PcaModel::total_variance)
      .def("explained_variance_ratio", &cg::PcaModel::explained_variance_ratio)
      .def("transform", [](const cg::PcaModel& p, const Eigen::MatrixXd& x) { return cg::pca_transform(p, x); },
           py::arg("data"))
      .def("reconstruct", &cg::pca_reconstruct, py::arg("coordinates"));

  m.def("pca_fit", [](const Eigen::MatrixXd& data, std::size_t q, std::uint64_t seed) {
    cg::PcaOptions o;
    o.seed = seed;
    return cg::pca_fit(data, q, o);
  }, py::arg("data"), py::arg("q"), py::arg("seed") = 0);
}
