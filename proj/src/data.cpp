#include <algorithm>
#include <cmath>
#include <numeric>

#include "trusthmd/data.hpp"
#include "trusthmd/random.hpp"

namespace trusthmd {

DatasetTaxonomy split_taxonomy(const Dataset& data, const std::set<std::string>& unknown_app_ids,
                               double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("test_fraction must lie in (0, 1)");
    if (data.is_empty()) throw Error("split_taxonomy: empty dataset");

    std::set<std::string> seen;
    for (const Sample& s : data.samples()) seen.insert(s.app_id);
    for (const std::string& id : unknown_app_ids) {
        if (!seen.contains(id)) throw Error("unknown app id '" + id + "' does not occur in the dataset");
    }

    std::vector<Sample> unknown;
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (unknown_app_ids.contains(data[i].app_id)) {
            unknown.push_back(data[i]);
        } else {
            known.push_back(i);
        }
    }
    if (known.empty()) throw Error("unknown app ids cover the whole dataset; nothing left to train on");

    const std::size_t k = data.num_classes();
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i : known) {
        if (!data[i].label) {
            throw Error("known sample " + std::to_string(i) + " (app '" + data[i].app_id + "') is unlabeled");
        }
        by_class[static_cast<std::size_t>(*data[i].label)].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (by_class[c].size() < 2) {
            throw Error("class '" + data.class_names()[c] + "' has " + std::to_string(by_class[c].size()) +
                        " known samples; at least 2 are required");
        }
    }

    // Largest-remainder allotment of round(n * f) test slots.
    const double n_known = static_cast<double>(known.size());
    const auto total = static_cast<std::size_t>(std::llround(n_known * test_fraction));
    std::vector<std::size_t> quota(k);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(by_class[c].size()) * test_fraction;
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        assigned += quota[c];
        remainders.emplace_back(exact - std::floor(exact), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total && r < remainders.size(); ++r, ++assigned) {
        ++quota[remainders[r].second];
    }

    std::vector<bool> in_test(data.size(), false);
    Rng rng(seed);
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<std::size_t> members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t t = 0; t < quota[c]; ++t) in_test[members[t]] = true;
    }
    std::vector<Sample> train;
    std::vector<Sample> test;
    for (std::size_t i : known) (in_test[i] ? test : train).push_back(data[i]);

    return DatasetTaxonomy{Dataset(std::move(train), data.dim(), data.class_names()),
                           Dataset(std::move(test), data.dim(), data.class_names()),
                           Dataset(std::move(unknown), data.dim(), data.class_names())};
}

std::string_view to_string(SyntheticRegime r) noexcept { return r == SyntheticRegime::ood ? "ood" : "overlap"; }

SyntheticRegime parse_regime(std::string_view s) {
    if (s == "ood") return SyntheticRegime::ood;
    if (s == "overlap") return SyntheticRegime::overlap;
    throw Error("unknown regime '" + std::string(s) + "' (expected ood, overlap)");
}

void SyntheticSpec::validate() const {
    if (n_train < 2 || n_test < 2) throw Error("synthetic n_train and n_test must be >= 2");
    if (dim < 1) throw Error("synthetic dimension must be positive");
    if (!(class_separation > 0.0) || !std::isfinite(class_separation)) {
        throw Error("class_separation must be positive");
    }
    if (regime == SyntheticRegime::ood) {
        if (!(ood_distance > class_separation) || !std::isfinite(ood_distance)) {
            throw Error("ood regime requires ood_distance > class_separation");
        }
        if (dim < 2) throw Error("ood regime requires dimension >= 2");
    }
}

std::vector<double> synthetic_class_axis(std::size_t dim) {
    return std::vector<double>(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

namespace {

// Unit vector (1,-1,1,-1,...) over the first even number of coordinates.
std::vector<double> ood_direction(std::size_t dim) {
    const std::size_t used = dim - dim % 2;
    std::vector<double> v(dim, 0.0);
    for (std::size_t j = 0; j < used; ++j) v[j] = (j % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(used));
    return v;
}

}  // namespace

DatasetTaxonomy generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    constexpr std::size_t kAppsPerClass = 4;
    const std::vector<std::string> classes{"benign", "malware"};
    const std::vector<double> axis = synthetic_class_axis(spec.dim);
    Rng rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    const auto draw = [&](const std::vector<double>& centre) {
        FeatureVector x(spec.dim);
        for (std::size_t j = 0; j < spec.dim; ++j) x[j] = centre[j] + noise(rng);
        return x;
    };
    const auto class_mean = [&](Label y) {
        std::vector<double> m(spec.dim);
        const double offset = (y == 0 ? -0.5 : 0.5) * spec.class_separation;
        for (std::size_t j = 0; j < spec.dim; ++j) m[j] = offset * axis[j];
        return m;
    };
    const std::vector<double> means[2] = {class_mean(0), class_mean(1)};

    const auto known_bucket = [&](std::size_t n) {
        std::vector<Sample> samples;
        samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Label y = static_cast<Label>(i % 2);
            samples.push_back({draw(means[y]), y,
                               "known-" + classes[static_cast<std::size_t>(y)] + "-" +
                                   std::to_string((i / 2) % kAppsPerClass)});
        }
        return Dataset(std::move(samples), spec.dim, classes);
    };

    Dataset train = known_bucket(spec.n_train);
    Dataset test = known_bucket(spec.n_test);

    std::vector<Sample> unknown;
    unknown.reserve(spec.n_unknown);
    if (spec.regime == SyntheticRegime::ood) {
        const double half = spec.class_separation / 2.0;
        const double height = std::sqrt(spec.ood_distance * spec.ood_distance - half * half);
        std::vector<double> centre = ood_direction(spec.dim);
        for (double& c : centre) c *= height;
        for (std::size_t i = 0; i < spec.n_unknown; ++i) {
            unknown.push_back({draw(centre), std::nullopt, std::string(kOodAppId)});
        }
    } else {
        for (std::size_t i = 0; i < spec.n_unknown; ++i) {
            const Label y = static_cast<Label>(i % 2);
            unknown.push_back({draw(means[y]), y, "unknown-" + std::to_string(i % kAppsPerClass)});
        }
    }
    return DatasetTaxonomy{std::move(train), std::move(test), Dataset(std::move(unknown), spec.dim, classes)};
}

}  // namespace trusthmd
