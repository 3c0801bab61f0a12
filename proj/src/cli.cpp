#include "trusthmd/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <type_traits>

#include "CLI11.hpp"
#include "trusthmd/data.hpp"
#include "trusthmd/ensemble.hpp"
#include "trusthmd/harness.hpp"

namespace trusthmd {

namespace {

struct DatasetFlags {
    std::string data;
    std::string manifest;
};

struct LearnerFlags {
    std::string kind = "tree";
    int members = 25;
    std::uint64_t seed = 0;
    std::uint64_t learner_seed = 0;
    std::string posterior = "hard_vote";
    std::string log_base = "2";
    int max_depth = 0;
    int min_samples_split = 2;
    std::string feature_subsample = "sqrt";
    double learning_rate = 0.1;
    int max_iters = 1000;
    double tolerance = 1e-6;
    double l2 = 1e-4;
    unsigned workers = 0;

    EnsembleConfig config() const {
        EnsembleConfig c;
        c.m = members;
        c.master_seed = seed;
        c.posterior_mode = parse_posterior_mode(posterior);
        c.entropy_log_base = parse_log_base(log_base);
        c.base.kind = parse_learner_kind(kind);
        c.base.seed = learner_seed;
        if (max_depth > 0) c.base.tree.max_depth = max_depth;
        c.base.tree.min_samples_split = min_samples_split;
        c.base.tree.feature_subsample = parse_feature_subsample(feature_subsample);
        c.base.gradient = {learning_rate, max_iters, tolerance, l2};
        c.validate();
        return c;
    }
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
    cmd->add_option("--data", f.data, "Feature CSV")->required();
    cmd->add_option("--manifest", f.manifest, "Dataset manifest (JSON); defaults apply when omitted");
}

void add_learner_flags(CLI::App* cmd, LearnerFlags& f) {
    cmd->add_option("--kind", f.kind, "Base learner: tree | logistic | linear_svm")->capture_default_str();
    cmd->add_option("-m,--members", f.members, "Ensemble size M")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Master seed for bootstrap replicates")->capture_default_str();
    cmd->add_option("--learner-seed", f.learner_seed, "Base learner seed, mixed into each member's seed")
        ->capture_default_str();
    cmd->add_option("--posterior", f.posterior, "hard_vote | soft_average")->capture_default_str();
    cmd->add_option("--log-base", f.log_base, "Entropy log base: 2 | e")->capture_default_str();
    cmd->add_option("--max-depth", f.max_depth, "Tree depth limit (0 = unbounded)")->capture_default_str();
    cmd->add_option("--min-samples-split", f.min_samples_split)->capture_default_str();
    cmd->add_option("--feature-subsample", f.feature_subsample, "Tree split candidates: all | sqrt")
        ->capture_default_str();
    cmd->add_option("--learning-rate", f.learning_rate)->capture_default_str();
    cmd->add_option("--max-iters", f.max_iters)->capture_default_str();
    cmd->add_option("--tolerance", f.tolerance)->capture_default_str();
    cmd->add_option("--l2", f.l2)->capture_default_str();
    cmd->add_option("--workers", f.workers, "Training threads (0 = all cores)")->capture_default_str();
}

Manifest manifest_for(const DatasetFlags& f) { return f.manifest.empty() ? Manifest{} : load_manifest(f.manifest); }

std::set<std::string> unknown_ids(const Manifest& m) {
    return {m.unknown_app_ids.begin(), m.unknown_app_ids.end()};
}

DatasetTaxonomy load_taxonomy(const DatasetFlags& f, const Manifest& m) {
    const Dataset all = load_csv(f.data, m.schema, m.classes);
    return split_taxonomy(all, unknown_ids(m), m.test_fraction, m.split_seed);
}

std::vector<std::string> csv_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cols.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != '"') {
            cur += c;
        }
    }
    cols.push_back(cur);
    for (std::string& c : cols) {
        c.erase(0, c.find_first_not_of(" \t"));
        c.erase(c.find_last_not_of(" \t") + 1);
    }
    return cols;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            if constexpr (std::is_same_v<T, int>) {
                values.push_back(std::stoi(item, &used));
            } else {
                values.push_back(std::stod(item, &used));
            }
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(std::string("bad ") + what + " entry '" + item + "'");
        }
    }
    if (values.empty()) throw Error(std::string("empty ") + what);
    return values;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

ReportFormat format_for(const std::string& flag, const std::string& path) {
    if (!flag.empty()) return parse_report_format(flag);
    return std::filesystem::path(path).extension() == ".csv" ? ReportFormat::csv : ReportFormat::json;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bagging ensembles with entropy-based rejection of uncertain predictions", "trusthmd"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // synth
    SyntheticSpec spec;
    std::string regime;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (dataset.csv + manifest.json)");
    synth->add_option("--regime", regime, "ood | overlap")->required();
    synth->add_option("--n-train", spec.n_train)->capture_default_str();
    synth->add_option("--n-test", spec.n_test)->capture_default_str();
    synth->add_option("--n-unknown", spec.n_unknown)->capture_default_str();
    synth->add_option("--dim", spec.dim)->capture_default_str();
    synth->add_option("--separation", spec.class_separation, "Class mean distance in sigma")
        ->capture_default_str();
    synth->add_option("--ood-distance", spec.ood_distance, "Unknown cluster distance from class means in sigma")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--out-dir", synth_dir, "Output directory")->required();

    // train
    DatasetFlags train_data;
    LearnerFlags train_learner;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "Fit an ensemble on the known training split");
    add_dataset_flags(train_cmd, train_data);
    add_learner_flags(train_cmd, train_learner);
    train_cmd->add_option("-o,--out", train_out, "Model file to write")->required();

    // predict
    std::string predict_model;
    DatasetFlags predict_data;
    double predict_threshold = 0.4;
    std::string predict_out;
    auto* predict_cmd = app.add_subcommand("predict", "Print per-sample verdicts with entropy");
    predict_cmd->add_option("--model", predict_model)->required();
    add_dataset_flags(predict_cmd, predict_data);
    predict_cmd->add_option("--threshold", predict_threshold, "Reject when entropy exceeds this")
        ->capture_default_str();
    predict_cmd->add_option("-o,--out", predict_out, "Write verdicts here instead of stdout");

    // sweep-threshold
    std::string sweep_model;
    DatasetFlags sweep_data;
    std::size_t grid_points = 50;
    std::string thresholds;
    std::string sweep_out;
    std::string sweep_format;
    auto* sweep_cmd = app.add_subcommand("sweep-threshold", "Rejection rates and metrics vs entropy threshold");
    sweep_cmd->add_option("--model", sweep_model)->required();
    add_dataset_flags(sweep_cmd, sweep_data);
    sweep_cmd->add_option("--grid-points", grid_points, "Evenly spaced thresholds over [0, log_b K]")
        ->capture_default_str();
    sweep_cmd->add_option("--thresholds", thresholds, "Explicit comma-separated thresholds");
    sweep_cmd->add_option("-o,--out", sweep_out)->required();
    sweep_cmd->add_option("--format", sweep_format, "json | csv (default: from extension)");

    // sweep-size
    DatasetFlags size_data;
    LearnerFlags size_learner;
    std::string m_grid = "1,2,4,8,16,32,64";
    std::string eval_bucket = "known";
    std::string size_out;
    std::string size_format;
    auto* size_cmd = app.add_subcommand("sweep-size", "Mean prediction entropy vs ensemble size");
    add_dataset_flags(size_cmd, size_data);
    add_learner_flags(size_cmd, size_learner);
    size_cmd->add_option("--m-grid", m_grid, "Strictly increasing ensemble sizes")->capture_default_str();
    size_cmd->add_option("--eval", eval_bucket, "Evaluation bucket: known | unknown | all")->capture_default_str();
    size_cmd->add_option("-o,--out", size_out)->required();
    size_cmd->add_option("--format", size_format, "json | csv (default: from extension)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (synth->parsed()) {
            spec.regime = parse_regime(regime);
            const DatasetTaxonomy tax = generate_synthetic(spec);
            std::vector<Sample> all = tax.train.samples();
            all.insert(all.end(), tax.test_known.samples().begin(), tax.test_known.samples().end());
            all.insert(all.end(), tax.unknown.samples().begin(), tax.unknown.samples().end());
            const Dataset combined(std::move(all), spec.dim, tax.train.class_names());

            Manifest manifest;
            manifest.classes = tax.train.class_names();
            std::set<std::string> ids;
            for (const Sample& s : tax.unknown.samples()) ids.insert(s.app_id);
            manifest.unknown_app_ids.assign(ids.begin(), ids.end());
            manifest.test_fraction =
                static_cast<double>(spec.n_test) / static_cast<double>(spec.n_train + spec.n_test);
            manifest.split_seed = spec.seed;

            std::filesystem::create_directories(synth_dir);
            const auto dir = std::filesystem::path(synth_dir);
            write_csv(combined, (dir / "dataset.csv").string());
            save_manifest(manifest, (dir / "manifest.json").string());
            out << "wrote " << combined.size() << " samples (" << tax.unknown.size() << " unknown, regime "
                << to_string(spec.regime) << ") to " << (dir / "dataset.csv").string() << '\n';
        } else if (train_cmd->parsed()) {
            const Manifest manifest = manifest_for(train_data);
            const DatasetTaxonomy tax = load_taxonomy(train_data, manifest);
            const EnsembleModel model = fit(train_learner.config(), tax.train, {train_learner.workers});
            save_model(model, train_out);
            out << model.summary() << "\ntrained on " << tax.train.size() << " samples; wrote " << train_out << '\n';
        } else if (predict_cmd->parsed()) {
            if (!(predict_threshold >= 0.0)) throw Error("--threshold must be >= 0");
            const EnsembleModel model = load_model(predict_model);
            Manifest manifest = manifest_for(predict_data);
            const std::vector<std::string> header = csv_header(predict_data.data);
            const auto has = [&](const std::optional<std::string>& col) {
                return col && std::find(header.begin(), header.end(), *col) != header.end();
            };
            if (!has(manifest.schema.label_column)) manifest.schema.label_column.reset();
            if (!has(manifest.schema.app_id_column)) manifest.schema.app_id_column.reset();
            const Dataset data = load_csv(predict_data.data, manifest.schema, model.class_names());

            std::ofstream file;
            if (!predict_out.empty()) {
                file.open(predict_out, std::ios::binary);
                if (!file) throw Error("cannot open '" + predict_out + "' for writing");
            }
            std::ostream& sink = predict_out.empty() ? out : file;
            sink << "index\tapp_id\tverdict\tlabel\tentropy\n";
            for (std::size_t i = 0; i < data.size(); ++i) {
                const Verdict v = model.gate(data[i].features, predict_threshold);
                const std::string& label = model.class_names()[static_cast<std::size_t>(v.prediction.label)];
                sink << i << '\t' << data[i].app_id << '\t' << (v.rejected ? std::string("uncertain") : label)
                     << '\t' << label << '\t' << fixed6(v.prediction.entropy) << '\n';
            }
        } else if (sweep_cmd->parsed()) {
            const EnsembleModel model = load_model(sweep_model);
            const Manifest manifest = manifest_for(sweep_data);
            if (manifest.classes != model.class_names()) {
                throw Error("manifest classes do not match the model's classes");
            }
            const DatasetTaxonomy tax = load_taxonomy(sweep_data, manifest);
            const std::vector<double> grid =
                thresholds.empty()
                    ? default_threshold_grid(model.num_classes(), model.config().entropy_log_base, grid_points)
                    : parse_list<double>(thresholds, "threshold list");
            const ThresholdSweepReport report = run_threshold_sweep(model, tax, grid, manifest.positive_label());
            emit_report(report, sweep_out, format_for(sweep_format, sweep_out));
            out << "threshold sweep over " << grid.size() << " points (" << report.n_known << " known, "
                << report.n_unknown << " unknown) written to " << sweep_out << '\n';
        } else if (size_cmd->parsed()) {
            const Manifest manifest = manifest_for(size_data);
            const DatasetTaxonomy tax = load_taxonomy(size_data, manifest);
            const Dataset* eval = nullptr;
            Dataset merged = Dataset::empty(tax.train.dim(), tax.train.class_names());
            if (eval_bucket == "known") {
                eval = &tax.test_known;
            } else if (eval_bucket == "unknown") {
                eval = &tax.unknown;
            } else if (eval_bucket == "all") {
                std::vector<Sample> all = tax.test_known.samples();
                all.insert(all.end(), tax.unknown.samples().begin(), tax.unknown.samples().end());
                merged = Dataset(std::move(all), tax.train.dim(), tax.train.class_names());
                eval = &merged;
            } else {
                throw Error("--eval must be known, unknown or all");
            }
            const StabilityReport report = run_stability_sweep(size_learner.config(), tax.train, *eval,
                                                               parse_list<int>(m_grid, "ensemble-size grid"),
                                                               {size_learner.workers});
            emit_report(report, size_out, format_for(size_format, size_out));
            out << "stability sweep over " << report.points.size() << " ensemble sizes written to " << size_out
                << '\n';
        }
    } catch (const std::exception& e) {
        err << "trusthmd: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace trusthmd
