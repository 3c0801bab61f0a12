#include "trusthmd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "json.hpp"

namespace trusthmd {

using ordered_json = nlohmann::ordered_json;

EntropySummary EntropySummary::of(std::vector<double> values) {
    EntropySummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    s.min = values.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

std::vector<double> default_threshold_grid(std::size_t num_classes, LogBase base, std::size_t points) {
    if (points < 2) throw Error("threshold grid needs at least 2 points");
    const double top = max_entropy(num_classes, base);
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = top * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    grid.back() = top;
    return grid;
}

std::vector<Prediction> predict_all(const EnsembleModel& model, const Dataset& data) {
    std::vector<Prediction> out;
    out.reserve(data.size());
    for (const Sample& s : data.samples()) out.push_back(model.predict(s.features));
    return out;
}

ThresholdSweepReport run_threshold_sweep(const EnsembleModel& model, const DatasetTaxonomy& taxonomy,
                                         const std::vector<double>& grid, Label positive_class) {
    if (grid.empty()) throw Error("threshold sweep: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) throw Error("threshold sweep: thresholds must be >= 0");
        if (i > 0 && grid[i] < grid[i - 1]) throw Error("threshold sweep: grid must be sorted ascending");
    }
    if (taxonomy.test_known.is_empty()) throw Error("threshold sweep: empty known test set");
    if (!taxonomy.test_known.all_labeled()) throw Error("threshold sweep: known test samples must be labeled");
    if (positive_class < 0 || static_cast<std::size_t>(positive_class) >= model.num_classes()) {
        throw Error("threshold sweep: positive class out of range");
    }

    const std::vector<Prediction> known = predict_all(model, taxonomy.test_known);
    const std::vector<Prediction> unknown = predict_all(model, taxonomy.unknown);

    std::vector<Label> truth;
    std::vector<Label> predicted;
    std::vector<double> known_h;
    for (std::size_t i = 0; i < known.size(); ++i) {
        truth.push_back(*taxonomy.test_known[i].label);
        predicted.push_back(known[i].label);
        known_h.push_back(known[i].entropy);
    }
    std::vector<double> unknown_h;
    for (const Prediction& p : unknown) unknown_h.push_back(p.entropy);

    ThresholdSweepReport report;
    report.log_base = std::string(to_string(model.config().entropy_log_base));
    report.class_names = model.class_names();
    report.positive_class = positive_class;
    report.n_known = known.size();
    report.n_unknown = unknown.size();
    report.known_entropy = EntropySummary::of(known_h);
    if (!unknown_h.empty()) report.unknown_entropy = EntropySummary::of(unknown_h);
    report.baseline_metrics = compute_metrics(predicted, truth, positive_class);

    for (double tau : grid) {
        ThresholdPoint pt;
        pt.threshold = tau;
        std::vector<Label> acc_pred;
        std::vector<Label> acc_truth;
        for (std::size_t i = 0; i < known.size(); ++i) {
            if (!exceeds_threshold(known_h[i], tau)) {
                acc_pred.push_back(predicted[i]);
                acc_truth.push_back(truth[i]);
            }
        }
        pt.known_accepted = acc_pred.size();
        pt.known_rejection_rate =
            static_cast<double>(known.size() - acc_pred.size()) / static_cast<double>(known.size());
        if (!unknown_h.empty()) {
            const auto rejected = std::count_if(unknown_h.begin(), unknown_h.end(),
                                                [tau](double h) { return exceeds_threshold(h, tau); });
            pt.unknown_rejection_rate = static_cast<double>(rejected) / static_cast<double>(unknown_h.size());
        }
        if (acc_pred.empty()) {
            pt.metrics_degenerate = true;
        } else {
            pt.accepted_metrics = compute_metrics(acc_pred, acc_truth, positive_class);
            pt.metrics_degenerate = pt.accepted_metrics.degenerate();
        }
        report.points.push_back(pt);
    }
    return report;
}

StabilityReport run_stability_sweep(const EnsembleConfig& config, const Dataset& data, const Dataset& eval_set,
                                    const std::vector<int>& m_grid, FitOptions options) {
    if (m_grid.empty()) throw Error("stability sweep: empty ensemble-size grid");
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (m_grid[i] < 1) throw Error("stability sweep: ensemble sizes must be positive");
        if (i > 0 && m_grid[i] <= m_grid[i - 1]) throw Error("stability sweep: grid must be strictly increasing");
    }
    if (eval_set.is_empty()) throw Error("stability sweep: empty evaluation set");

    StabilityReport report;
    report.log_base = std::string(to_string(config.entropy_log_base));
    report.n_eval = eval_set.size();
    for (int m : m_grid) {
        EnsembleConfig cfg = config;
        cfg.m = m;
        const EnsembleModel model = fit(cfg, data, options);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const Prediction& p : predict_all(model, eval_set)) {
            sum += p.entropy;
            sum_sq += p.entropy * p.entropy;
        }
        const double n = static_cast<double>(eval_set.size());
        const double mean = sum / n;
        report.points.push_back({m, mean, std::sqrt(std::max(0.0, sum_sq / n - mean * mean))});
    }
    return report;
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw Error("unknown report format '" + std::string(s) + "' (expected json, csv)");
}

double round_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

namespace {

std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

ordered_json summary_json(const EntropySummary& s) {
    return ordered_json{{"count", s.count},
                        {"min", round_sig6(s.min)},
                        {"q1", round_sig6(s.q1)},
                        {"median", round_sig6(s.median)},
                        {"q3", round_sig6(s.q3)},
                        {"max", round_sig6(s.max)},
                        {"mean", round_sig6(s.mean)}};
}

EntropySummary summary_from(const ordered_json& j) {
    return {j.at("count").get<std::size_t>(), j.at("min").get<double>(),    j.at("q1").get<double>(),
            j.at("median").get<double>(),    j.at("q3").get<double>(),     j.at("max").get<double>(),
            j.at("mean").get<double>()};
}

ordered_json metrics_json(const ClassificationMetrics& m) {
    return ordered_json{{"precision", round_sig6(m.precision)},
                        {"recall", round_sig6(m.recall)},
                        {"f1", round_sig6(m.f1)},
                        {"accuracy", round_sig6(m.accuracy)},
                        {"tp", m.tp},
                        {"fp", m.fp},
                        {"tn", m.tn},
                        {"fn", m.fn}};
}

ClassificationMetrics metrics_from(const ordered_json& j) {
    ClassificationMetrics m;
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.accuracy = j.at("accuracy").get<double>();
    m.tp = j.at("tp").get<std::size_t>();
    m.fp = j.at("fp").get<std::size_t>();
    m.tn = j.at("tn").get<std::size_t>();
    m.fn = j.at("fn").get<std::size_t>();
    return m;
}

void check_schema(const ordered_json& j, std::string_view name, int version) {
    if (j.at("schema").get<std::string>() != name || j.at("version").get<int>() != version) {
        throw Error("report is not " + std::string(name) + " version " + std::to_string(version));
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

std::string to_json(const ThresholdSweepReport& r) {
    ordered_json j;
    j["schema"] = "trusthmd.threshold_sweep";
    j["version"] = ThresholdSweepReport::kSchemaVersion;
    j["log_base"] = r.log_base;
    j["classes"] = r.class_names;
    j["positive_class"] = r.positive_class;
    j["n_known"] = r.n_known;
    j["n_unknown"] = r.n_unknown;
    j["known_entropy"] = summary_json(r.known_entropy);
    j["unknown_entropy"] = r.unknown_entropy ? summary_json(*r.unknown_entropy) : ordered_json(nullptr);
    j["baseline"] = metrics_json(r.baseline_metrics);
    ordered_json points = ordered_json::array();
    for (const ThresholdPoint& p : r.points) {
        points.push_back({{"threshold", round_sig6(p.threshold)},
                          {"known_rejection_rate", round_sig6(p.known_rejection_rate)},
                          {"unknown_rejection_rate", p.unknown_rejection_rate
                                                         ? ordered_json(round_sig6(*p.unknown_rejection_rate))
                                                         : ordered_json(nullptr)},
                          {"known_accepted", p.known_accepted},
                          {"metrics", metrics_json(p.accepted_metrics)},
                          {"metrics_degenerate", p.metrics_degenerate}});
    }
    j["points"] = std::move(points);
    return j.dump(2) + "\n";
}

std::string to_json(const StabilityReport& r) {
    ordered_json j;
    j["schema"] = "trusthmd.stability_sweep";
    j["version"] = StabilityReport::kSchemaVersion;
    j["log_base"] = r.log_base;
    j["n_eval"] = r.n_eval;
    ordered_json points = ordered_json::array();
    for (const StabilityPoint& p : r.points) {
        points.push_back(
            {{"m", p.m}, {"mean_entropy", round_sig6(p.mean_entropy)}, {"std_entropy", round_sig6(p.std_entropy)}});
    }
    j["points"] = std::move(points);
    return j.dump(2) + "\n";
}

std::string to_csv(const ThresholdSweepReport& r) {
    std::string out =
        "threshold,known_rejection_rate,unknown_rejection_rate,known_accepted,precision,recall,f1,accuracy,"
        "tp,fp,tn,fn,metrics_degenerate\n";
    for (const ThresholdPoint& p : r.points) {
        const ClassificationMetrics& m = p.accepted_metrics;
        out += g6(p.threshold) + ',' + g6(p.known_rejection_rate) + ',' +
               (p.unknown_rejection_rate ? g6(*p.unknown_rejection_rate) : std::string()) + ',' +
               std::to_string(p.known_accepted) + ',' + g6(m.precision) + ',' + g6(m.recall) + ',' + g6(m.f1) +
               ',' + g6(m.accuracy) + ',' + std::to_string(m.tp) + ',' + std::to_string(m.fp) + ',' +
               std::to_string(m.tn) + ',' + std::to_string(m.fn) + ',' + (p.metrics_degenerate ? "1" : "0") + '\n';
    }
    return out;
}

std::string to_csv(const StabilityReport& r) {
    std::string out = "m,mean_entropy,std_entropy\n";
    for (const StabilityPoint& p : r.points) {
        out += std::to_string(p.m) + ',' + g6(p.mean_entropy) + ',' + g6(p.std_entropy) + '\n';
    }
    return out;
}

ThresholdSweepReport threshold_report_from_json(std::string_view text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        check_schema(j, "trusthmd.threshold_sweep", ThresholdSweepReport::kSchemaVersion);
        ThresholdSweepReport r;
        r.log_base = j.at("log_base").get<std::string>();
        r.class_names = j.at("classes").get<std::vector<std::string>>();
        r.positive_class = j.at("positive_class").get<Label>();
        r.n_known = j.at("n_known").get<std::size_t>();
        r.n_unknown = j.at("n_unknown").get<std::size_t>();
        r.known_entropy = summary_from(j.at("known_entropy"));
        if (!j.at("unknown_entropy").is_null()) r.unknown_entropy = summary_from(j.at("unknown_entropy"));
        r.baseline_metrics = metrics_from(j.at("baseline"));
        for (const auto& p : j.at("points")) {
            ThresholdPoint pt;
            pt.threshold = p.at("threshold").get<double>();
            pt.known_rejection_rate = p.at("known_rejection_rate").get<double>();
            if (!p.at("unknown_rejection_rate").is_null()) {
                pt.unknown_rejection_rate = p.at("unknown_rejection_rate").get<double>();
            }
            pt.known_accepted = p.at("known_accepted").get<std::size_t>();
            pt.accepted_metrics = metrics_from(p.at("metrics"));
            pt.metrics_degenerate = p.at("metrics_degenerate").get<bool>();
            r.points.push_back(pt);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("threshold report: ") + e.what());
    }
}

StabilityReport stability_report_from_json(std::string_view text) {
    try {
        const ordered_json j = ordered_json::parse(text);
        check_schema(j, "trusthmd.stability_sweep", StabilityReport::kSchemaVersion);
        StabilityReport r;
        r.log_base = j.at("log_base").get<std::string>();
        r.n_eval = j.at("n_eval").get<std::size_t>();
        for (const auto& p : j.at("points")) {
            r.points.push_back(
                {p.at("m").get<int>(), p.at("mean_entropy").get<double>(), p.at("std_entropy").get<double>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("stability report: ") + e.what());
    }
}

void emit_report(const ThresholdSweepReport& report, const std::string& path, ReportFormat format) {
    if (report.points.empty()) throw Error("refusing to emit a threshold report with no grid points");
    write_text(path, format == ReportFormat::json ? to_json(report) : to_csv(report));
}

void emit_report(const StabilityReport& report, const std::string& path, ReportFormat format) {
    if (report.points.empty()) throw Error("refusing to emit a stability report with no grid points");
    write_text(path, format == ReportFormat::json ? to_json(report) : to_csv(report));
}

}  // namespace trusthmd
