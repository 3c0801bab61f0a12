// Python bindings for the trusthmd core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "trusthmd/data.hpp"
#include "trusthmd/ensemble.hpp"
#include "trusthmd/harness.hpp"

namespace py = pybind11;
using namespace trusthmd;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& features, const std::vector<std::optional<Label>>& labels,
                     const std::vector<std::string>& app_ids, std::vector<std::string> class_names) {
    if (features.empty()) throw Error("dataset needs at least one row");
    if (labels.size() != features.size() || app_ids.size() != features.size()) {
        throw Error("features, labels and app_ids must have the same length");
    }
    std::vector<Sample> samples;
    samples.reserve(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) samples.push_back({features[i], labels[i], app_ids[i]});
    return Dataset(std::move(samples), features.front().size(), std::move(class_names));
}

std::vector<std::vector<double>> feature_rows(const Dataset& d) {
    std::vector<std::vector<double>> rows;
    rows.reserve(d.size());
    for (const Sample& s : d.samples()) rows.push_back(s.features);
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bagging ensembles with entropy-based rejection";
    py::register_exception<Error>(m, "TrustError", PyExc_ValueError);

    py::enum_<LearnerKind>(m, "LearnerKind")
        .value("tree", LearnerKind::tree)
        .value("logistic", LearnerKind::logistic)
        .value("linear_svm", LearnerKind::linear_svm);
    py::enum_<FeatureSubsample>(m, "FeatureSubsample")
        .value("all", FeatureSubsample::all)
        .value("sqrt", FeatureSubsample::sqrt);
    py::enum_<PosteriorMode>(m, "PosteriorMode")
        .value("hard_vote", PosteriorMode::hard_vote)
        .value("soft_average", PosteriorMode::soft_average);
    py::enum_<LogBase>(m, "LogBase").value("two", LogBase::two).value("e", LogBase::e);
    py::enum_<SyntheticRegime>(m, "SyntheticRegime")
        .value("ood", SyntheticRegime::ood)
        .value("overlap", SyntheticRegime::overlap);

    py::class_<ClassificationMetrics>(m, "ClassificationMetrics")
        .def_readonly("precision", &ClassificationMetrics::precision)
        .def_readonly("recall", &ClassificationMetrics::recall)
        .def_readonly("f1", &ClassificationMetrics::f1)
        .def_readonly("accuracy", &ClassificationMetrics::accuracy)
        .def_readonly("tp", &ClassificationMetrics::tp)
        .def_readonly("fp", &ClassificationMetrics::fp)
        .def_readonly("tn", &ClassificationMetrics::tn)
        .def_readonly("fn", &ClassificationMetrics::fn);

    m.def(
        "compute_metrics",
        [](const std::vector<Label>& predicted, const std::vector<Label>& truth, Label positive) {
            return compute_metrics(predicted, truth, positive);
        },
        py::arg("predicted"), py::arg("truth"), py::arg("positive") = 1);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("features"), py::arg("labels"), py::arg("app_ids"),
             py::arg("class_names") = std::vector<std::string>{"benign", "malware"})
        .def("__len__", &Dataset::size)
        .def_property_readonly("dim", &Dataset::dim)
        .def_property_readonly("class_names", &Dataset::class_names)
        .def_property_readonly("features", &feature_rows)
        .def_property_readonly("labels",
                               [](const Dataset& d) {
                                   std::vector<std::optional<Label>> out;
                                   for (const Sample& s : d.samples()) out.push_back(s.label);
                                   return out;
                               })
        .def_property_readonly("app_ids", [](const Dataset& d) {
            std::vector<std::string> out;
            for (const Sample& s : d.samples()) out.push_back(s.app_id);
            return out;
        });

    py::class_<DatasetTaxonomy>(m, "DatasetTaxonomy")
        .def_readonly("train", &DatasetTaxonomy::train)
        .def_readonly("test_known", &DatasetTaxonomy::test_known)
        .def_readonly("unknown", &DatasetTaxonomy::unknown);

    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("regime", &SyntheticSpec::regime)
        .def_readwrite("n_train", &SyntheticSpec::n_train)
        .def_readwrite("n_test", &SyntheticSpec::n_test)
        .def_readwrite("n_unknown", &SyntheticSpec::n_unknown)
        .def_readwrite("dim", &SyntheticSpec::dim)
        .def_readwrite("class_separation", &SyntheticSpec::class_separation)
        .def_readwrite("ood_distance", &SyntheticSpec::ood_distance)
        .def_readwrite("seed", &SyntheticSpec::seed);

    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));
    m.def(
        "split_taxonomy",
        [](const Dataset& d, const std::set<std::string>& unknown, double f, std::uint64_t seed) {
            return split_taxonomy(d, unknown, f, seed);
        },
        py::arg("data"), py::arg("unknown_app_ids") = std::set<std::string>{}, py::arg("test_fraction") = 0.25,
        py::arg("seed") = 0);
    m.def(
        "load_csv",
        [](const std::string& path, std::vector<std::string> class_names) {
            return load_csv(path, CsvSchema{}, class_names);
        },
        py::arg("path"), py::arg("class_names") = std::vector<std::string>{"benign", "malware"});

    py::class_<TreeParams>(m, "TreeParams")
        .def(py::init<>())
        .def_readwrite("max_depth", &TreeParams::max_depth)
        .def_readwrite("min_samples_split", &TreeParams::min_samples_split)
        .def_readwrite("feature_subsample", &TreeParams::feature_subsample);
    py::class_<GradientParams>(m, "GradientParams")
        .def(py::init<>())
        .def_readwrite("learning_rate", &GradientParams::learning_rate)
        .def_readwrite("max_iters", &GradientParams::max_iters)
        .def_readwrite("tolerance", &GradientParams::tolerance)
        .def_readwrite("l2", &GradientParams::l2);
    py::class_<LearnerConfig>(m, "LearnerConfig")
        .def(py::init<>())
        .def_readwrite("kind", &LearnerConfig::kind)
        .def_readwrite("tree", &LearnerConfig::tree)
        .def_readwrite("gradient", &LearnerConfig::gradient)
        .def_readwrite("seed", &LearnerConfig::seed);
    py::class_<EnsembleConfig>(m, "EnsembleConfig")
        .def(py::init<>())
        .def_readwrite("m", &EnsembleConfig::m)
        .def_readwrite("base", &EnsembleConfig::base)
        .def_readwrite("master_seed", &EnsembleConfig::master_seed)
        .def_readwrite("posterior_mode", &EnsembleConfig::posterior_mode)
        .def_readwrite("entropy_log_base", &EnsembleConfig::entropy_log_base);

    py::class_<Prediction>(m, "Prediction")
        .def_readonly("vote_distribution", &Prediction::vote_distribution)
        .def_readonly("per_learner_labels", &Prediction::per_learner_labels)
        .def_readonly("entropy", &Prediction::entropy)
        .def_readonly("label", &Prediction::label);
    py::class_<Verdict>(m, "Verdict")
        .def_readonly("prediction", &Verdict::prediction)
        .def_readonly("rejected", &Verdict::rejected)
        .def_readonly("threshold_used", &Verdict::threshold_used)
        .def_property_readonly("accepted_label", &Verdict::accepted_label);

    py::class_<EnsembleModel>(m, "EnsembleModel")
        .def_property_readonly("config", &EnsembleModel::config)
        .def_property_readonly("size", &EnsembleModel::size)
        .def_property_readonly("dim", &EnsembleModel::dim)
        .def_property_readonly("class_names", &EnsembleModel::class_names)
        .def_property_readonly("non_converged_count", &EnsembleModel::non_converged_count)
        .def("predict", [](const EnsembleModel& m, const std::vector<double>& x) { return m.predict(x); })
        .def("gate", [](const EnsembleModel& m, const std::vector<double>& x, double t) { return m.gate(x, t); },
             py::arg("x"), py::arg("threshold"))
        .def("summary", &EnsembleModel::summary)
        .def("save", [](const EnsembleModel& m, const std::string& path) { save_model(m, path); })
        .def("dumps",
             [](const EnsembleModel& m) {
                 std::ostringstream out;
                 save_model(m, out);
                 return out.str();
             })
        .def_static("load", [](const std::string& path) { return load_model(path); })
        .def_static("loads", [](const std::string& text) {
            std::istringstream in(text);
            return load_model(in);
        });

    m.def(
        "fit",
        [](const EnsembleConfig& c, const Dataset& d, unsigned workers) {
            py::gil_scoped_release release;
            return fit(c, d, {workers});
        },
        py::arg("config"), py::arg("data"), py::arg("workers") = 0);
    m.def(
        "entropy_of", [](const std::vector<double>& p, LogBase b) { return entropy_of(p, b); }, py::arg("dist"),
        py::arg("base") = LogBase::two);
    m.def("default_threshold_grid", &default_threshold_grid, py::arg("num_classes"), py::arg("base") = LogBase::two,
          py::arg("points") = 50);
    m.def(
        "threshold_sweep_json",
        [](const EnsembleModel& model, const DatasetTaxonomy& tax, const std::vector<double>& grid, Label positive) {
            return to_json(run_threshold_sweep(model, tax, grid, positive));
        },
        py::arg("model"), py::arg("taxonomy"), py::arg("grid"), py::arg("positive_class") = 1);
    m.def(
        "stability_sweep_json",
        [](const EnsembleConfig& c, const Dataset& d, const Dataset& eval, const std::vector<int>& grid,
           unsigned workers) {
            py::gil_scoped_release release;
            return to_json(run_stability_sweep(c, d, eval, grid, {workers}));
        },
        py::arg("config"), py::arg("data"), py::arg("eval_set"), py::arg("m_grid"), py::arg("workers") = 0);
}
