#include "trusthmd/core.hpp"

#include <cmath>
#include <string>

namespace trusthmd {

Dataset::Dataset(std::vector<Sample> samples, std::size_t dim, std::vector<std::string> class_names)
    : samples_(std::move(samples)), dim_(dim), class_names_(std::move(class_names)) {
    if (class_names_.size() < 2) {
        throw Error("dataset needs at least 2 classes, got " + std::to_string(class_names_.size()));
    }
    if (dim_ == 0) {
        throw Error("dataset feature dimension must be positive");
    }
    const auto k = static_cast<Label>(class_names_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        if (s.features.size() != dim_) {
            throw Error("sample " + std::to_string(i) + " has dimension " + std::to_string(s.features.size()) +
                        ", expected " + std::to_string(dim_));
        }
        if (s.label && (*s.label < 0 || *s.label >= k)) {
            throw Error("sample " + std::to_string(i) + " has label " + std::to_string(*s.label) +
                        " outside [0, " + std::to_string(k) + ")");
        }
        if (s.app_id.empty()) {
            throw Error("sample " + std::to_string(i) + " has an empty app_id");
        }
    }
}

Dataset Dataset::empty(std::size_t dim, std::vector<std::string> class_names) {
    return Dataset({}, dim, std::move(class_names));
}

bool Dataset::all_labeled() const noexcept {
    for (const Sample& s : samples_) {
        if (!s.label) return false;
    }
    return true;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes(), 0);
    for (const Sample& s : samples_) {
        if (s.label) ++counts[static_cast<std::size_t>(*s.label)];
    }
    return counts;
}

void Dataset::require_labeled_nonempty(const char* what) const {
    if (samples_.empty()) {
        throw Error(std::string(what) + ": dataset is empty");
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!samples_[i].label) {
            throw Error(std::string(what) + ": sample " + std::to_string(i) + " (app '" + samples_[i].app_id +
                        "') is unlabeled");
        }
        require_finite(samples_[i].features, what);
    }
}

void require_finite(FeatureView x, const char* what) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(x[j])) {
            throw Error(std::string(what) + ": non-finite feature at index " + std::to_string(j));
        }
    }
}

ClassificationMetrics compute_metrics(std::span<const Label> predicted, std::span<const Label> truth,
                                      Label positive) {
    if (predicted.size() != truth.size()) {
        throw Error("compute_metrics: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                    std::to_string(truth.size()) + ")");
    }
    if (predicted.empty()) {
        throw Error("compute_metrics: empty input");
    }
    ClassificationMetrics m;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == positive;
        const bool t = truth[i] == positive;
        if (p && t) ++m.tp;
        else if (p && !t) ++m.fp;
        else if (!p && t) ++m.fn;
        else ++m.tn;
        if (predicted[i] == truth[i]) ++correct;
    }
    const auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.accuracy = ratio(correct, predicted.size());
    return m;
}

}  // namespace trusthmd
