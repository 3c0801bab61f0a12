#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trusthmd {

/// Thrown for every precondition or data-validation failure in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense class code in [0, K). Human-readable names live in Dataset::class_names().
using Label = int;

using FeatureVector = std::vector<double>;
using FeatureView = std::span<const double>;

struct Sample {
    FeatureVector features;
    std::optional<Label> label;  // unlabeled unknowns carry no label
    std::string app_id;
};

/// A labeled (or partially labeled) feature matrix with per-sample application
/// identity. All samples share one dimension; labels lie in [0, K).
class Dataset {
public:
    Dataset(std::vector<Sample> samples, std::size_t dim, std::vector<std::string> class_names);

    /// Empty dataset with a fixed shape; used for empty buckets.
    static Dataset empty(std::size_t dim, std::vector<std::string> class_names);

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool is_empty() const noexcept { return samples_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t num_classes() const noexcept { return class_names_.size(); }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }

    bool all_labeled() const noexcept;
    std::vector<std::size_t> class_counts() const;

    /// Throws unless the dataset is non-empty and every sample carries a label.
    void require_labeled_nonempty(const char* what) const;

private:
    std::vector<Sample> samples_;
    std::size_t dim_ = 0;
    std::vector<std::string> class_names_;
};

/// Throws if any value is NaN or infinite.
void require_finite(FeatureView x, const char* what);

struct ClassificationMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    /// True when precision or recall fell back to 0 because its denominator was 0.
    bool degenerate() const noexcept { return tp + fp == 0 || tp + fn == 0; }

    bool operator==(const ClassificationMetrics&) const = default;
};

/// One-vs-rest counts for `positive`; precision/recall are 0 on a zero
/// denominator and f1 is 0 when precision + recall is 0.
ClassificationMetrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth,
                                      Label positive);

}  // namespace trusthmd
