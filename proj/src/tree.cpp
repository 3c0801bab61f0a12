// CART classification tree grown by Gini impurity reduction.
//
// Candidate thresholds are midpoints between consecutive distinct sorted
// values of a feature. Among equal gains the lower feature index wins, then
// the lower threshold. A split is taken whenever a valid threshold exists,
// even with zero gain, so XOR-like nodes still get partitioned.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trusthmd/learners.hpp"
#include "trusthmd/random.hpp"

namespace trusthmd {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const LearnerConfig& config, const Dataset& data)
        : params_(config.tree),
          k_(data.num_classes()),
          d_(data.dim()),
          n_(data.size()),
          columns_(d_ * n_),
          labels_(n_),
          rng_(config.seed) {
        for (std::size_t i = 0; i < n_; ++i) {
            const Sample& s = data[i];
            for (std::size_t j = 0; j < d_; ++j) columns_[j * n_ + i] = s.features[j];
            labels_[i] = static_cast<std::size_t>(*s.label);
        }
        subsample_size_ = params_.feature_subsample == FeatureSubsample::sqrt
                              ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d_))))
                              : d_;
        subsample_size_ = std::clamp<std::size_t>(subsample_size_, 1, d_);
    }

    TreeModel build() {
        struct Pending {
            int node;
            std::vector<std::size_t> rows;
            int depth;
        };
        std::vector<std::size_t> all(n_);
        std::iota(all.begin(), all.end(), std::size_t{0});
        nodes_.push_back(make_node(all));
        std::vector<Pending> stack;
        stack.push_back({0, std::move(all), 0});
        while (!stack.empty()) {
            Pending job = std::move(stack.back());
            stack.pop_back();
            if (!splittable(job)) continue;
            const Split split = best_split(job.rows, nodes_[static_cast<std::size_t>(job.node)].counts);
            if (split.feature < 0) continue;

            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            const double* col = columns_.data() + static_cast<std::size_t>(split.feature) * n_;
            for (std::size_t r : job.rows) (col[r] <= split.threshold ? left : right).push_back(r);

            const int left_id = static_cast<int>(nodes_.size());
            nodes_.push_back(make_node(left));
            const int right_id = static_cast<int>(nodes_.size());
            nodes_.push_back(make_node(right));
            TreeNode& parent = nodes_[static_cast<std::size_t>(job.node)];
            parent.feature = split.feature;
            parent.threshold = split.threshold;
            parent.left = left_id;
            parent.right = right_id;

            stack.push_back({right_id, std::move(right), job.depth + 1});
            stack.push_back({left_id, std::move(left), job.depth + 1});
        }
        return TreeModel{std::move(nodes_)};
    }

private:
    template <typename Pending>
    bool splittable(const Pending& job) const {
        if (params_.max_depth && job.depth >= *params_.max_depth) return false;
        if (job.rows.size() < static_cast<std::size_t>(params_.min_samples_split)) return false;
        const auto& counts = nodes_[static_cast<std::size_t>(job.node)].counts;
        return std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) > 1;
    }

    TreeNode make_node(const std::vector<std::size_t>& rows) const {
        TreeNode node;
        node.counts.assign(k_, 0.0);
        for (std::size_t r : rows) node.counts[labels_[r]] += 1.0;
        return node;
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> features(d_);
        std::iota(features.begin(), features.end(), std::size_t{0});
        if (subsample_size_ >= d_) return features;
        for (std::size_t i = 0; i < subsample_size_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, d_ - 1);
            std::swap(features[i], features[pick(rng_)]);
        }
        std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(subsample_size_));
        std::sort(features.begin() + static_cast<std::ptrdiff_t>(subsample_size_), features.end());
        return features;
    }

    Split best_split(const std::vector<std::size_t>& rows, const std::vector<double>& parent_counts) {
        const std::vector<std::size_t> features = candidate_features();
        Split best;
        // Drawn features first; the remainder only if none of them admits a threshold.
        for (std::size_t pass = 0; pass < 2 && best.feature < 0; ++pass) {
            const std::size_t begin = pass == 0 ? 0 : subsample_size_;
            const std::size_t end = pass == 0 ? subsample_size_ : d_;
            for (std::size_t fi = begin; fi < end; ++fi) scan_feature(features[fi], rows, parent_counts, best);
        }
        return best;
    }

    void scan_feature(std::size_t f, const std::vector<std::size_t>& rows, const std::vector<double>& parent_counts,
                      Split& best) {
        const double* col = columns_.data() + f * n_;
        order_.assign(rows.begin(), rows.end());
        std::sort(order_.begin(), order_.end(), [col](std::size_t a, std::size_t b) {
            return col[a] < col[b] || (col[a] == col[b] && a < b);
        });
        const double n = static_cast<double>(rows.size());
        const double parent_gini = gini(parent_counts);
        left_.assign(k_, 0.0);
        right_ = parent_counts;
        for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
            const std::size_t y = labels_[order_[i]];
            left_[y] += 1.0;
            right_[y] -= 1.0;
            const double lo = col[order_[i]];
            const double hi = col[order_[i + 1]];
            if (!(lo < hi)) continue;
            const double n_left = static_cast<double>(i + 1);
            const double gain = parent_gini - (n_left / n) * gini(left_) - ((n - n_left) / n) * gini(right_);
            if (best.feature < 0 || gain > best.gain) {
                double mid = lo + (hi - lo) / 2.0;
                if (!(mid < hi)) mid = lo;
                best = {static_cast<int>(f), mid, gain};
            }
        }
    }

    TreeParams params_;
    std::size_t k_;
    std::size_t d_;
    std::size_t n_;
    std::vector<double> columns_;  // column-major d x n
    std::vector<std::size_t> labels_;
    std::size_t subsample_size_ = 0;
    Rng rng_;
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> order_;
    std::vector<double> left_;
    std::vector<double> right_;
};

}  // namespace

TrainedLearner train_tree(const LearnerConfig& config, const Dataset& data) {
    TreeBuilder builder(config, data);
    return TrainedLearner(LearnerKind::tree, data.num_classes(), data.dim(), builder.build(), true, config.seed);
}

}  // namespace trusthmd
