#include "trusthmd/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "trusthmd/random.hpp"

namespace trusthmd {

std::string_view to_string(PosteriorMode mode) noexcept {
    return mode == PosteriorMode::hard_vote ? "hard_vote" : "soft_average";
}

PosteriorMode parse_posterior_mode(std::string_view s) {
    if (s == "hard_vote" || s == "hard") return PosteriorMode::hard_vote;
    if (s == "soft_average" || s == "soft") return PosteriorMode::soft_average;
    throw Error("unknown posterior mode '" + std::string(s) + "' (expected hard_vote, soft_average)");
}

std::string_view to_string(LogBase base) noexcept { return base == LogBase::two ? "2" : "e"; }

LogBase parse_log_base(std::string_view s) {
    if (s == "2") return LogBase::two;
    if (s == "e") return LogBase::e;
    throw Error("unknown log base '" + std::string(s) + "' (expected 2 or e)");
}

double max_entropy(std::size_t num_classes, LogBase base) {
    const double ln_k = std::log(static_cast<double>(num_classes));
    return base == LogBase::two ? ln_k / std::log(2.0) : ln_k;
}

double entropy_of(std::span<const double> dist, LogBase base) {
    if (dist.empty()) throw Error("entropy_of: empty distribution");
    double sum = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error("entropy_of: negative or non-finite probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw Error("entropy_of: probabilities sum to " + std::to_string(sum) + ", not 1");
    }
    double h = 0.0;
    for (double p : dist) {
        if (p > 0.0) h -= p * std::log(p);
    }
    if (base == LogBase::two) h /= std::log(2.0);
    return std::clamp(h, 0.0, max_entropy(dist.size(), base));
}

void EnsembleConfig::validate() const {
    if (m < 1) throw Error("ensemble size m must be >= 1");
    base.validate();
}

Standardizer Standardizer::fit(const Dataset& data) {
    if (data.is_empty()) throw Error("standardizer: empty dataset");
    const std::size_t d = data.dim();
    const double n = static_cast<double>(data.size());
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 0.0);
    for (const Sample& x : data.samples()) {
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += x.features[j];
    }
    for (double& m : s.mean) m /= n;
    for (const Sample& x : data.samples()) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x.features[j] - s.mean[j];
            s.scale[j] += c * c;
        }
    }
    for (double& v : s.scale) {
        v = std::sqrt(v / n);
        if (!(v > 0.0) || !std::isfinite(v)) v = 1.0;
    }
    return s;
}

void Standardizer::apply(FeatureView x, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
}

EnsembleModel::EnsembleModel(EnsembleConfig config, Standardizer standardizer, std::vector<TrainedLearner> learners,
                             std::vector<std::string> class_names)
    : config_(std::move(config)),
      standardizer_(std::move(standardizer)),
      learners_(std::move(learners)),
      class_names_(std::move(class_names)) {
    config_.validate();
    if (learners_.size() != static_cast<std::size_t>(config_.m)) {
        throw Error("ensemble holds " + std::to_string(learners_.size()) + " learners, config says " +
                    std::to_string(config_.m));
    }
    if (class_names_.size() < 2) throw Error("ensemble needs at least 2 classes");
    if (standardizer_.mean.size() != standardizer_.scale.size() || standardizer_.mean.empty()) {
        throw Error("standardizer mean/scale dimensions disagree");
    }
    for (const TrainedLearner& l : learners_) {
        if (l.dim() != dim() || l.num_classes() != num_classes()) {
            throw Error("learner shape does not match the ensemble");
        }
    }
}

std::size_t EnsembleModel::non_converged_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(learners_.begin(), learners_.end(), [](const TrainedLearner& l) { return !l.converged(); }));
}

Prediction EnsembleModel::predict(FeatureView x) const {
    if (x.size() != dim()) {
        throw Error("feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                    std::to_string(dim()));
    }
    require_finite(x, "predict");
    std::vector<double> z(dim());
    standardizer_.apply(x, z);

    const std::size_t k = num_classes();
    const double m = static_cast<double>(learners_.size());
    Prediction p;
    p.vote_distribution.assign(k, 0.0);
    p.per_learner_labels.reserve(learners_.size());
    if (config_.posterior_mode == PosteriorMode::hard_vote) {
        std::vector<std::size_t> votes(k, 0);
        for (const TrainedLearner& l : learners_) {
            const Label y = l.predict_label_unchecked(z);
            p.per_learner_labels.push_back(y);
            ++votes[static_cast<std::size_t>(y)];
        }
        for (std::size_t c = 0; c < k; ++c) p.vote_distribution[c] = static_cast<double>(votes[c]) / m;
    } else {
        std::vector<double> proba(k);
        for (const TrainedLearner& l : learners_) {
            p.per_learner_labels.push_back(l.predict_label_unchecked(z));
            l.predict_proba_unchecked(z, proba);
            for (std::size_t c = 0; c < k; ++c) p.vote_distribution[c] += proba[c];
        }
        for (double& v : p.vote_distribution) v /= m;
    }
    p.entropy = entropy_of(p.vote_distribution, config_.entropy_log_base);
    p.label = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (p.vote_distribution[c] > p.vote_distribution[static_cast<std::size_t>(p.label)]) {
            p.label = static_cast<Label>(c);
        }
    }
    return p;
}

Verdict EnsembleModel::gate(FeatureView x, double threshold) const {
    if (!(threshold >= 0.0)) throw Error("gate: threshold must be >= 0");
    Verdict v;
    v.prediction = predict(x);
    v.threshold_used = threshold;
    v.rejected = exceeds_threshold(v.prediction.entropy, threshold);
    return v;
}

std::string EnsembleModel::summary() const {
    std::ostringstream out;
    out << "ensemble: " << learners_.size() << " x " << to_string(config_.base.kind) << ", K=" << num_classes()
        << " (";
    for (std::size_t c = 0; c < class_names_.size(); ++c) out << (c ? "," : "") << class_names_[c];
    out << "), d=" << dim() << ", posterior=" << to_string(config_.posterior_mode)
        << ", log base=" << to_string(config_.entropy_log_base) << ", master_seed=" << config_.master_seed;
    const std::size_t bad = non_converged_count();
    out << "\nconverged: " << (learners_.size() - bad) << "/" << learners_.size();
    if (bad > 0) {
        out << " (non-converged members still vote:";
        for (std::size_t i = 0; i < learners_.size(); ++i) {
            if (!learners_[i].converged()) out << ' ' << i;
        }
        out << ")";
    }
    return out.str();
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error("bootstrap of an empty dataset");
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> idx(n);
    for (std::size_t& i : idx) i = pick(rng);
    return idx;
}

EnsembleModel fit(const EnsembleConfig& config, const Dataset& data, FitOptions options) {
    config.validate();
    data.require_labeled_nonempty("fit");
    Standardizer standardizer = Standardizer::fit(data);

    std::vector<Sample> standardized = data.samples();
    for (Sample& s : standardized) standardizer.apply(s.features, s.features);

    const std::size_t m = static_cast<std::size_t>(config.m);
    std::vector<std::optional<TrainedLearner>> slots(m);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto work = [&] {
        for (std::size_t i = next++; i < m; i = next++) {
            try {
                const std::uint64_t child = derive_seed(config.master_seed, i);
                std::vector<Sample> replicate;
                replicate.reserve(standardized.size());
                for (std::size_t r : bootstrap_indices(standardized.size(), child)) {
                    replicate.push_back(standardized[r]);
                }
                LearnerConfig lc = config.base;
                lc.seed = splitmix64(child ^ config.base.seed);
                slots[i].emplace(train(lc, Dataset(std::move(replicate), data.dim(), data.class_names())));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, m));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<TrainedLearner> learners;
    learners.reserve(m);
    for (auto& slot : slots) learners.push_back(std::move(*slot));
    return EnsembleModel(config, std::move(standardizer), std::move(learners), data.class_names());
}

}  // namespace trusthmd
