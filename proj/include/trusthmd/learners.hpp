#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trusthmd/core.hpp"

namespace trusthmd {

enum class LearnerKind { tree, logistic, linear_svm };
enum class FeatureSubsample { all, sqrt };

std::string_view to_string(LearnerKind kind) noexcept;
LearnerKind parse_learner_kind(std::string_view s);
std::string_view to_string(FeatureSubsample f) noexcept;
FeatureSubsample parse_feature_subsample(std::string_view s);

struct TreeParams {
    std::optional<int> max_depth;  // unbounded when empty
    int min_samples_split = 2;
    FeatureSubsample feature_subsample = FeatureSubsample::sqrt;
};

struct GradientParams {
    double learning_rate = 0.1;
    int max_iters = 1000;
    double tolerance = 1e-6;
    double l2 = 1e-4;
};

struct LearnerConfig {
    LearnerKind kind = LearnerKind::tree;
    TreeParams tree;
    GradientParams gradient;
    std::uint64_t seed = 0;

    /// Throws Error when a field for the selected kind is out of range.
    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    std::vector<double> counts;  // training class frequencies reaching this node

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    bool operator==(const TreeModel&) const = default;
};

/// Binary problems hold one row scoring class 1; K > 2 holds one
/// one-vs-rest row per class.
struct LinearModel {
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    bool operator==(const LinearModel&) const = default;
};

/// Emitted when the training replicate holds a single class.
struct ConstantModel {
    Label label = 0;
    bool operator==(const ConstantModel&) const = default;
};

using LearnerParams = std::variant<TreeModel, LinearModel, ConstantModel>;

class TrainedLearner {
public:
    TrainedLearner(LearnerKind kind, std::size_t num_classes, std::size_t dim, LearnerParams params, bool converged,
                   std::uint64_t seed_used, int iterations = 0);

    LearnerKind kind() const noexcept { return kind_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::size_t dim() const noexcept { return dim_; }
    const LearnerParams& params() const noexcept { return params_; }
    bool converged() const noexcept { return converged_; }
    std::uint64_t seed_used() const noexcept { return seed_used_; }
    /// Gradient iterations taken (0 for trees and constant learners).
    int iterations() const noexcept { return iterations_; }
    bool is_constant() const noexcept { return std::holds_alternative<ConstantModel>(params_); }

    Label predict_label(FeatureView x) const;
    std::vector<double> predict_proba(FeatureView x) const;

    /// Same as the public predictors without input validation; callers guarantee
    /// dimension and finiteness.
    Label predict_label_unchecked(FeatureView x) const;
    void predict_proba_unchecked(FeatureView x, std::span<double> out) const;

    bool operator==(const TrainedLearner&) const = default;

private:
    void check_input(FeatureView x) const;
    const TreeNode& leaf_for(FeatureView x) const;

    LearnerKind kind_;
    std::size_t num_classes_;
    std::size_t dim_;
    LearnerParams params_;
    bool converged_;
    std::uint64_t seed_used_;
    int iterations_;
};

/// Deterministic given (config, data). Requires a non-empty, fully labeled
/// dataset with finite features. Non-convergence of the gradient learners is
/// reported through TrainedLearner::converged(), never thrown.
TrainedLearner train(const LearnerConfig& config, const Dataset& data);

/// Gini impurity of a class-frequency vector.
double gini(std::span<const double> counts);

}  // namespace trusthmd
