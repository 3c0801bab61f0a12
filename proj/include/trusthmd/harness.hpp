#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trusthmd/core.hpp"
#include "trusthmd/data.hpp"
#include "trusthmd/ensemble.hpp"

namespace trusthmd {

struct EntropySummary {
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;

    /// Quartiles by linear interpolation between order statistics.
    static EntropySummary of(std::vector<double> values);
    bool operator==(const EntropySummary&) const = default;
};

struct ThresholdPoint {
    double threshold = 0.0;
    double known_rejection_rate = 0.0;
    std::optional<double> unknown_rejection_rate;  // empty when the unknown bucket is empty
    std::size_t known_accepted = 0;
    ClassificationMetrics accepted_metrics;  // over accepted known samples only
    bool metrics_degenerate = false;          // nothing accepted, or a zero precision/recall denominator

    bool operator==(const ThresholdPoint&) const = default;
};

struct ThresholdSweepReport {
    static constexpr int kSchemaVersion = 1;

    std::string log_base;
    std::vector<std::string> class_names;
    Label positive_class = 1;
    std::size_t n_known = 0;
    std::size_t n_unknown = 0;
    EntropySummary known_entropy;
    std::optional<EntropySummary> unknown_entropy;
    ClassificationMetrics baseline_metrics;  // all known samples, no rejection
    std::vector<ThresholdPoint> points;

    bool operator==(const ThresholdSweepReport&) const = default;
};

struct StabilityPoint {
    int m = 0;
    double mean_entropy = 0.0;
    double std_entropy = 0.0;  // population standard deviation
    bool operator==(const StabilityPoint&) const = default;
};

struct StabilityReport {
    static constexpr int kSchemaVersion = 1;

    std::string log_base;
    std::size_t n_eval = 0;
    std::vector<StabilityPoint> points;

    bool operator==(const StabilityReport&) const = default;
};

/// `points` evenly spaced thresholds over [0, log_base(K)], both ends included.
std::vector<double> default_threshold_grid(std::size_t num_classes, LogBase base, std::size_t points = 50);

/// Per-sample predictions over a dataset, computed once and reused per threshold.
std::vector<Prediction> predict_all(const EnsembleModel& model, const Dataset& data);

/// Gates every test_known and unknown sample at each threshold. Metrics use
/// accepted known samples only; unknown samples contribute only rejection rates.
ThresholdSweepReport run_threshold_sweep(const EnsembleModel& model, const DatasetTaxonomy& taxonomy,
                                         const std::vector<double>& grid, Label positive_class = 1);

/// Fits a fresh ensemble per size in m_grid (same base config and master
/// seed) on `data` and summarizes prediction entropy over `eval_set`.
StabilityReport run_stability_sweep(const EnsembleConfig& config, const Dataset& data, const Dataset& eval_set,
                                    const std::vector<int>& m_grid, FitOptions options = {});

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(std::string_view s);

/// Rounds to 6 significant digits, the precision every report is written with.
double round_sig6(double v);

std::string to_json(const ThresholdSweepReport& report);
std::string to_json(const StabilityReport& report);
std::string to_csv(const ThresholdSweepReport& report);
std::string to_csv(const StabilityReport& report);

ThresholdSweepReport threshold_report_from_json(std::string_view text);
StabilityReport stability_report_from_json(std::string_view text);

void emit_report(const ThresholdSweepReport& report, const std::string& path, ReportFormat format);
void emit_report(const StabilityReport& report, const std::string& path, ReportFormat format);

}  // namespace trusthmd
