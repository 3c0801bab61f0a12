#include "trusthmd/learners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trusthmd/objectives.hpp"

namespace trusthmd {

// Defined in tree.cpp and linear.cpp.
TrainedLearner train_tree(const LearnerConfig& config, const Dataset& data);
TrainedLearner train_linear(const LearnerConfig& config, const Dataset& data);

std::string_view to_string(LearnerKind kind) noexcept {
    switch (kind) {
        case LearnerKind::tree: return "tree";
        case LearnerKind::logistic: return "logistic";
        case LearnerKind::linear_svm: return "linear_svm";
    }
    return "?";
}

LearnerKind parse_learner_kind(std::string_view s) {
    if (s == "tree") return LearnerKind::tree;
    if (s == "logistic") return LearnerKind::logistic;
    if (s == "linear_svm" || s == "svm") return LearnerKind::linear_svm;
    throw Error("unknown learner kind '" + std::string(s) + "' (expected tree, logistic, linear_svm)");
}

std::string_view to_string(FeatureSubsample f) noexcept {
    return f == FeatureSubsample::all ? "all" : "sqrt";
}

FeatureSubsample parse_feature_subsample(std::string_view s) {
    if (s == "all") return FeatureSubsample::all;
    if (s == "sqrt") return FeatureSubsample::sqrt;
    throw Error("unknown feature subsample '" + std::string(s) + "' (expected all, sqrt)");
}

void LearnerConfig::validate() const {
    if (kind == LearnerKind::tree) {
        if (tree.max_depth && *tree.max_depth < 1) throw Error("tree.max_depth must be positive");
        if (tree.min_samples_split < 2) throw Error("tree.min_samples_split must be >= 2");
        return;
    }
    if (!(gradient.learning_rate > 0.0) || !std::isfinite(gradient.learning_rate)) {
        throw Error("gradient.learning_rate must be a positive finite number");
    }
    if (gradient.max_iters < 1) throw Error("gradient.max_iters must be positive");
    if (!(gradient.tolerance > 0.0)) throw Error("gradient.tolerance must be positive");
    if (!(gradient.l2 >= 0.0) || !std::isfinite(gradient.l2)) throw Error("gradient.l2 must be non-negative");
}

TrainedLearner::TrainedLearner(LearnerKind kind, std::size_t num_classes, std::size_t dim, LearnerParams params,
                               bool converged, std::uint64_t seed_used, int iterations)
    : kind_(kind),
      num_classes_(num_classes),
      dim_(dim),
      params_(std::move(params)),
      converged_(converged),
      seed_used_(seed_used),
      iterations_(iterations) {
    if (num_classes_ < 2) throw Error("learner needs at least 2 classes");
    if (const auto* c = std::get_if<ConstantModel>(&params_)) {
        if (c->label < 0 || static_cast<std::size_t>(c->label) >= num_classes_) {
            throw Error("constant learner label out of range");
        }
    } else if (const auto* t = std::get_if<TreeModel>(&params_)) {
        if (t->nodes.empty()) throw Error("tree has no nodes");
        const int n = static_cast<int>(t->nodes.size());
        for (const TreeNode& node : t->nodes) {
            if (node.counts.size() != num_classes_) throw Error("tree node class counts have wrong size");
            if (!node.is_leaf() && (node.feature >= static_cast<int>(dim_) || node.left <= 0 || node.left >= n ||
                                    node.right <= 0 || node.right >= n)) {
                throw Error("tree node references out of range");
            }
        }
    } else {
        const auto& lin = std::get<LinearModel>(params_);
        const std::size_t rows = num_classes_ == 2 ? 1 : num_classes_;
        if (lin.weights.size() != rows || lin.bias.size() != rows) throw Error("linear model has wrong row count");
        for (const auto& w : lin.weights) {
            if (w.size() != dim_) throw Error("linear model weight vector has wrong dimension");
        }
    }
}

void TrainedLearner::check_input(FeatureView x) const {
    if (x.size() != dim_) {
        throw Error("feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(dim_));
    }
    require_finite(x, "predict");
}

const TreeNode& TrainedLearner::leaf_for(FeatureView x) const {
    const auto& nodes = std::get<TreeModel>(params_).nodes;
    const TreeNode* node = &nodes[0];
    while (!node->is_leaf()) {
        node = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                                   ? node->left
                                                   : node->right)];
    }
    return *node;
}

namespace {

// Lowest index wins ties.
template <typename Range>
Label argmax(const Range& values) {
    Label best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        if (values[k] > values[static_cast<std::size_t>(best)]) best = static_cast<Label>(k);
    }
    return best;
}

double linear_score(const std::vector<double>& w, double b, FeatureView x) {
    double s = b;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
    return s;
}

}  // namespace

Label TrainedLearner::predict_label(FeatureView x) const {
    check_input(x);
    return predict_label_unchecked(x);
}

std::vector<double> TrainedLearner::predict_proba(FeatureView x) const {
    check_input(x);
    std::vector<double> out(num_classes_);
    predict_proba_unchecked(x, out);
    return out;
}

Label TrainedLearner::predict_label_unchecked(FeatureView x) const {
    if (const auto* c = std::get_if<ConstantModel>(&params_)) return c->label;
    if (std::holds_alternative<TreeModel>(params_)) return argmax(leaf_for(x).counts);
    const auto& lin = std::get<LinearModel>(params_);
    if (num_classes_ == 2) return linear_score(lin.weights[0], lin.bias[0], x) > 0.0 ? 1 : 0;
    std::vector<double> scores(num_classes_);
    for (std::size_t k = 0; k < num_classes_; ++k) scores[k] = linear_score(lin.weights[k], lin.bias[k], x);
    return argmax(scores);
}

void TrainedLearner::predict_proba_unchecked(FeatureView x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (const auto* c = std::get_if<ConstantModel>(&params_)) {
        out[static_cast<std::size_t>(c->label)] = 1.0;
        return;
    }
    if (std::holds_alternative<TreeModel>(params_)) {
        const auto& counts = leaf_for(x).counts;
        double total = 0.0;
        for (double c : counts) total += c;
        for (std::size_t k = 0; k < num_classes_; ++k) out[k] = counts[k] / total;
        return;
    }
    const auto& lin = std::get<LinearModel>(params_);
    if (num_classes_ == 2) {
        const double p1 = sigmoid(linear_score(lin.weights[0], lin.bias[0], x));
        out[0] = 1.0 - p1;
        out[1] = p1;
        return;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < num_classes_; ++k) {
        out[k] = sigmoid(linear_score(lin.weights[k], lin.bias[k], x));
        total += out[k];
    }
    for (double& p : out) p /= total;
}

double gini(std::span<const double> counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += (c / total) * (c / total);
    return 1.0 - sum_sq;
}

TrainedLearner train(const LearnerConfig& config, const Dataset& data) {
    config.validate();
    data.require_labeled_nonempty("train");
    const auto counts = data.class_counts();
    const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    if (present == 1 && config.kind != LearnerKind::tree) {
        const auto label = static_cast<Label>(std::find_if(counts.begin(), counts.end(),
                                                           [](std::size_t c) { return c > 0; }) -
                                              counts.begin());
        return TrainedLearner(config.kind, data.num_classes(), data.dim(), ConstantModel{label}, true, config.seed);
    }
    if (config.kind == LearnerKind::tree) return train_tree(config, data);
    return train_linear(config, data);
}

}  // namespace trusthmd
