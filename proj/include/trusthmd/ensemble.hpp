#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trusthmd/core.hpp"
#include "trusthmd/learners.hpp"

namespace trusthmd {

/// hard_vote: normalized counts of member labels. soft_average: mean of
/// member probability vectors.
enum class PosteriorMode { hard_vote, soft_average };
enum class LogBase { two, e };

std::string_view to_string(PosteriorMode mode) noexcept;
PosteriorMode parse_posterior_mode(std::string_view s);
std::string_view to_string(LogBase base) noexcept;
LogBase parse_log_base(std::string_view s);

/// log_base(K), the largest attainable entropy over K classes.
double max_entropy(std::size_t num_classes, LogBase base);

/// -Σ p log p with 0 log 0 = 0, clamped to [0, log_base(K)]. Requires
/// non-negative entries summing to 1 within 1e-6.
double entropy_of(std::span<const double> dist, LogBase base);

struct EnsembleConfig {
    int m = 25;
    LearnerConfig base;
    std::uint64_t master_seed = 0;
    PosteriorMode posterior_mode = PosteriorMode::hard_vote;
    LogBase entropy_log_base = LogBase::two;

    void validate() const;
};

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;  // population std, 1 for zero-variance features

    static Standardizer fit(const Dataset& data);
    void apply(FeatureView x, std::span<double> out) const;
    std::size_t dim() const noexcept { return mean.size(); }
    bool operator==(const Standardizer&) const = default;
};

struct Prediction {
    std::vector<double> vote_distribution;
    std::vector<Label> per_learner_labels;
    double entropy = 0.0;
    Label label = 0;
};

struct Verdict {
    Prediction prediction;
    bool rejected = false;
    double threshold_used = 0.0;

    /// The prediction's label when accepted.
    std::optional<Label> accepted_label() const {
        return rejected ? std::nullopt : std::optional<Label>(prediction.label);
    }
};

/// The rejection rule shared by gate() and the sweeps: strictly above threshold.
inline bool exceeds_threshold(double entropy, double threshold) noexcept { return entropy > threshold; }

struct FitOptions {
    unsigned workers = 0;  // 0 = hardware concurrency
};

/// M trained learners plus the standardization they share. Immutable; safe
/// for concurrent predict calls.
class EnsembleModel {
public:
    EnsembleModel(EnsembleConfig config, Standardizer standardizer, std::vector<TrainedLearner> learners,
                  std::vector<std::string> class_names);

    const EnsembleConfig& config() const noexcept { return config_; }
    const Standardizer& standardizer() const noexcept { return standardizer_; }
    const std::vector<TrainedLearner>& learners() const noexcept { return learners_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }
    std::size_t num_classes() const noexcept { return class_names_.size(); }
    std::size_t dim() const noexcept { return standardizer_.dim(); }
    std::size_t size() const noexcept { return learners_.size(); }
    std::size_t non_converged_count() const noexcept;

    Prediction predict(FeatureView x) const;
    Verdict gate(FeatureView x, double threshold) const;

    /// One-paragraph human-readable summary, including non-converged members.
    std::string summary() const;

private:
    EnsembleConfig config_;
    Standardizer standardizer_;
    std::vector<TrainedLearner> learners_;
    std::vector<std::string> class_names_;
};

/// Indices of a size-n bootstrap replicate (draws with replacement).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

/// Member i trains on the standardized bootstrap replicate drawn with
/// derive_seed(master_seed, i), using learner seed
/// splitmix64(derive_seed(master_seed, i) ^ base.seed). The result does not
/// depend on options.workers.
EnsembleModel fit(const EnsembleConfig& config, const Dataset& data, FitOptions options = {});

// Model files. See README for the format description.
void save_model(const EnsembleModel& model, std::ostream& out);
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(std::istream& in);
EnsembleModel load_model(const std::string& path);

}  // namespace trusthmd
