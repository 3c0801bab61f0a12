#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "trusthmd/data.hpp"
#include "trusthmd/ensemble.hpp"
#include "trusthmd/random.hpp"

using namespace trusthmd;

namespace {

const std::vector<std::string> kNames{"benign", "malware"};

// Ensemble of constant voters over 1-D input: `ones` vote class 1, the rest class 0.
EnsembleModel voters(int m, int ones, PosteriorMode mode = PosteriorMode::hard_vote) {
    EnsembleConfig cfg;
    cfg.m = m;
    cfg.base.kind = LearnerKind::logistic;
    cfg.posterior_mode = mode;
    std::vector<TrainedLearner> learners;
    for (int i = 0; i < m; ++i) {
        learners.emplace_back(LearnerKind::logistic, 2, 1, ConstantModel{i < ones ? 1 : 0}, true, i);
    }
    return EnsembleModel(cfg, Standardizer{{0.0}, {1.0}}, std::move(learners), kNames);
}

const std::vector<double> kX{0.0};

Dataset overlap_train(std::uint64_t seed, std::size_t n = 400) {
    SyntheticSpec s;
    s.regime = SyntheticRegime::overlap;
    s.class_separation = 0.5;
    s.n_train = n;
    s.n_test = 100;
    s.n_unknown = 0;
    s.dim = 4;
    s.seed = seed;
    return generate_synthetic(s).train;
}

}  // namespace

TEST_CASE("entropy_of examples") {
    CHECK(entropy_of(std::vector<double>{1.0, 0.0}, LogBase::two) == 0.0);
    CHECK(entropy_of(std::vector<double>{0.5, 0.5}, LogBase::two) == doctest::Approx(1.0));
    const std::vector<double> third(3, 1.0 / 3.0);
    CHECK(entropy_of(third, LogBase::e) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(entropy_of(third, LogBase::e) == doctest::Approx(1.0986).epsilon(1e-4));
    CHECK(max_entropy(2, LogBase::two) == 1.0);
    CHECK(max_entropy(3, LogBase::e) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("entropy_of rejects invalid distributions") {
    CHECK_THROWS_AS(entropy_of(std::vector<double>{}, LogBase::two), Error);
    CHECK_THROWS_AS(entropy_of(std::vector<double>{0.7, 0.7}, LogBase::two), Error);
    CHECK_THROWS_AS(entropy_of(std::vector<double>{1.2, -0.2}, LogBase::two), Error);
    CHECK_THROWS_AS(entropy_of(std::vector<double>{std::nan(""), 1.0}, LogBase::two), Error);
}

TEST_CASE("entropy is zero exactly for one-hot distributions") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 2 + trial % 5;
        std::vector<double> p(k, 0.0);
        if (trial % 3 == 0) {
            p[trial % k] = 1.0;
            CHECK(entropy_of(p, LogBase::two) == 0.0);
            continue;
        }
        double sum = 0.0;
        for (double& v : p) sum += (v = u(rng) + 1e-3);
        for (double& v : p) v /= sum;
        const double h = entropy_of(p, LogBase::two);
        CHECK(h > 0.0);
        CHECK(h <= std::log2(static_cast<double>(k)));
        CHECK(h == doctest::Approx(oracle::entropy(p, true)).epsilon(1e-12));
    }
}

TEST_CASE("hard vote distributions and entropy") {
    SUBCASE("unanimous") {
        const Prediction p = voters(10, 0).predict(kX);
        CHECK(p.vote_distribution == std::vector<double>{1.0, 0.0});
        CHECK(p.entropy == 0.0);
        CHECK(p.label == 0);
    }
    SUBCASE("5/5 split") {
        const Prediction p = voters(10, 5).predict(kX);
        CHECK(p.vote_distribution == std::vector<double>{0.5, 0.5});
        CHECK(p.entropy == doctest::Approx(1.0));
        CHECK(p.label == 0);
    }
    SUBCASE("6/2 split") {
        const Prediction p = voters(8, 2).predict(kX);
        CHECK(p.entropy == doctest::Approx(oracle::entropy({0.75, 0.25}, true)).epsilon(1e-12));
        CHECK(p.entropy == doctest::Approx(0.8113).epsilon(1e-4));
        CHECK(p.per_learner_labels.size() == 8);
    }
}

TEST_CASE("gate uses strict inequality") {
    CHECK_FALSE(voters(10, 0).gate(kX, 0.0).rejected);
    CHECK(voters(10, 0).gate(kX, 0.0).accepted_label() == 0);
    CHECK(voters(10, 5).gate(kX, 0.40).rejected);
    CHECK_FALSE(voters(10, 5).gate(kX, 0.40).accepted_label().has_value());
    CHECK_FALSE(voters(8, 2).gate(kX, 0.9).rejected);
    CHECK_FALSE(voters(10, 5).gate(kX, 1.0).rejected);
    CHECK(voters(10, 5).gate(kX, 0.7).threshold_used == 0.7);
    CHECK_THROWS_AS(voters(10, 5).gate(kX, -0.1), Error);
}

TEST_CASE("soft average is the mean of learner probabilities") {
    EnsembleConfig cfg;
    cfg.m = 2;
    cfg.base.kind = LearnerKind::logistic;
    cfg.posterior_mode = PosteriorMode::soft_average;
    std::vector<TrainedLearner> learners;
    learners.emplace_back(LearnerKind::logistic, 2, 1, LinearModel{{{1.0}}, {0.0}}, true, 0);
    learners.emplace_back(LearnerKind::logistic, 2, 1, ConstantModel{0}, true, 1);
    const EnsembleModel model(cfg, Standardizer{{0.0}, {1.0}}, std::move(learners), kNames);
    const Prediction p = model.predict(std::vector<double>{2.0});
    const double s = 1.0 / (1.0 + std::exp(-2.0));
    CHECK(p.vote_distribution[1] == doctest::Approx(s / 2.0));
    CHECK(p.vote_distribution[0] == doctest::Approx(1.0 - s / 2.0));
    CHECK(p.entropy == doctest::Approx(oracle::entropy(p.vote_distribution, true)));
}

TEST_CASE("m=1 always gives entropy 0 in hard_vote mode") {
    const Dataset d = overlap_train(2);
    EnsembleConfig cfg;
    cfg.m = 1;
    const EnsembleModel model = fit(cfg, d, {1});
    for (const Sample& s : d.samples()) CHECK(model.predict(s.features).entropy == 0.0);
}

TEST_CASE("bootstrap keeps about 63.2% distinct samples") {
    const std::size_t n = 500;
    double total = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto idx = bootstrap_indices(n, derive_seed(7, r));
        CHECK(idx.size() == n);
        total += static_cast<double>(std::set<std::size_t>(idx.begin(), idx.end()).size()) / n;
    }
    const double expected = 1.0 - std::pow(1.0 - 1.0 / n, static_cast<double>(n));
    CHECK(std::abs(total / 100.0 - expected) <= 0.03);
    CHECK(expected == doctest::Approx(0.632).epsilon(1e-3));
}

TEST_CASE("worker count does not change the model") {
    const Dataset d = overlap_train(3);
    for (LearnerKind kind : {LearnerKind::tree, LearnerKind::linear_svm}) {
        EnsembleConfig cfg;
        cfg.m = 12;
        cfg.base.kind = kind;
        cfg.master_seed = 17;
        const EnsembleModel a = fit(cfg, d, {1});
        const EnsembleModel b = fit(cfg, d, {8});
        CHECK(a.learners() == b.learners());
        for (const Sample& s : d.samples()) {
            CHECK(a.predict(s.features).per_learner_labels == b.predict(s.features).per_learner_labels);
        }
    }
}

TEST_CASE("vote distribution matches per-learner counting") {
    const Dataset d = overlap_train(4);
    EnsembleConfig cfg;
    cfg.m = 9;
    const EnsembleModel model = fit(cfg, d, {1});
    std::vector<double> z(d.dim());
    for (const Sample& s : d.samples()) {
        const Prediction p = model.predict(s.features);
        model.standardizer().apply(s.features, z);
        std::vector<int> counts(2, 0);
        for (const TrainedLearner& l : model.learners()) ++counts[l.predict_label(z)];
        CHECK(p.vote_distribution[0] == counts[0] / 9.0);
        CHECK(p.vote_distribution[1] == counts[1] / 9.0);
        CHECK(p.vote_distribution[0] + p.vote_distribution[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("learner order does not affect predictions") {
    const Dataset d = overlap_train(5);
    EnsembleConfig cfg;
    cfg.m = 11;
    const EnsembleModel model = fit(cfg, d, {1});
    std::vector<TrainedLearner> shuffled = model.learners();
    std::mt19937_64 rng(3);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const EnsembleModel other(model.config(), model.standardizer(), shuffled, model.class_names());
    for (const Sample& s : d.samples()) {
        const Prediction a = model.predict(s.features);
        const Prediction b = other.predict(s.features);
        CHECK(a.vote_distribution == b.vote_distribution);
        CHECK(a.entropy == b.entropy);
        CHECK(a.label == b.label);
        CHECK(model.gate(s.features, 0.5).rejected == other.gate(s.features, 0.5).rejected);
        auto la = a.per_learner_labels;
        auto lb = b.per_learner_labels;
        std::sort(la.begin(), la.end());
        std::sort(lb.begin(), lb.end());
        CHECK(la == lb);
    }
}

TEST_CASE("rejected set shrinks as the threshold grows") {
    const Dataset d = overlap_train(6);
    EnsembleConfig cfg;
    cfg.m = 15;
    const EnsembleModel model = fit(cfg, d, {1});
    std::vector<bool> previous(d.size(), true);
    for (double tau = 0.0; tau <= 1.0; tau += 0.05) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            const bool rejected = model.gate(d[i].features, tau).rejected;
            if (rejected) CHECK(previous[i]);
            previous[i] = rejected;
        }
    }
}

TEST_CASE("master seed controls bootstrap replicates") {
    CHECK(bootstrap_indices(100, 5) == bootstrap_indices(100, 5));
    CHECK(bootstrap_indices(100, 5) != bootstrap_indices(100, 6));
    const Dataset d = overlap_train(7);
    EnsembleConfig cfg;
    cfg.m = 5;
    cfg.master_seed = 1;
    const EnsembleModel a = fit(cfg, d, {1});
    CHECK(a.learners() == fit(cfg, d, {1}).learners());
    cfg.master_seed = 2;
    CHECK_FALSE(a.learners() == fit(cfg, d, {1}).learners());
}

TEST_CASE("standardizer uses population std and guards constant features") {
    const Dataset d({{{1.0, 5.0}, 0, "a"}, {{3.0, 5.0}, 1, "a"}}, 2, kNames);
    const Standardizer s = Standardizer::fit(d);
    CHECK(s.mean == std::vector<double>{2.0, 5.0});
    CHECK(s.scale == std::vector<double>{1.0, 1.0});
    std::vector<double> z(2);
    s.apply(std::vector<double>{3.0, 7.0}, z);
    CHECK(z == std::vector<double>{1.0, 2.0});
}

TEST_CASE("non-converged learners are reported") {
    const Dataset d = overlap_train(8);
    EnsembleConfig cfg;
    cfg.m = 4;
    cfg.base.kind = LearnerKind::logistic;
    cfg.base.gradient.max_iters = 1;
    cfg.base.gradient.tolerance = 1e-15;
    const EnsembleModel model = fit(cfg, d, {1});
    CHECK(model.non_converged_count() == 4);
    CHECK(model.summary().find("4") != std::string::npos);
}

TEST_CASE("model serialization round-trip") {
    const Dataset d = overlap_train(9);
    for (LearnerKind kind : {LearnerKind::tree, LearnerKind::logistic, LearnerKind::linear_svm}) {
        EnsembleConfig cfg;
        cfg.m = 6;
        cfg.base.kind = kind;
        cfg.base.tree.max_depth = 7;
        cfg.posterior_mode = PosteriorMode::soft_average;
        cfg.entropy_log_base = LogBase::e;
        const EnsembleModel model = fit(cfg, d, {1});
        std::stringstream buf;
        save_model(model, buf);
        const std::string text = buf.str();
        const EnsembleModel loaded = load_model(buf);
        CHECK(loaded.learners() == model.learners());
        CHECK(loaded.standardizer() == model.standardizer());
        CHECK(loaded.class_names() == model.class_names());
        std::stringstream again;
        save_model(loaded, again);
        CHECK(again.str() == text);
    }
}

TEST_CASE("load_model rejects malformed input") {
    std::stringstream empty;
    CHECK_THROWS_AS(load_model(empty), Error);
    std::stringstream wrong("trusthmd-model 2\n");
    CHECK_THROWS_AS(load_model(wrong), Error);

    std::stringstream buf;
    save_model(voters(3, 1), buf);
    std::string text = buf.str();
    text.resize(text.size() / 2);
    std::stringstream truncated(text);
    CHECK_THROWS_AS(load_model(truncated), Error);
}

TEST_CASE("ensemble config validation") {
    EnsembleConfig cfg;
    cfg.m = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK(parse_log_base("e") == LogBase::e);
    CHECK(parse_log_base("2") == LogBase::two);
    CHECK_THROWS_AS(parse_log_base("10"), Error);
    CHECK(parse_posterior_mode("soft_average") == PosteriorMode::soft_average);
}
