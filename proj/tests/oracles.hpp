#pragma once

// Independent reference computations for tests. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

/// -Σ p log_b p evaluated directly with std::log2 / std::log.
inline double entropy(const std::vector<double>& p, bool base2) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * (base2 ? std::log2(v) : std::log(v));
    }
    return h;
}

inline double gini_from_counts(const std::vector<int>& counts) {
    int n = 0;
    for (int c : counts) n += c;
    if (n == 0) return 0.0;
    double s = 0.0;
    for (int c : counts) s += static_cast<double>(c) * c;
    return 1.0 - s / (static_cast<double>(n) * n);
}

struct RootSplit {
    int feature;
    double threshold;
    double gain;
};

/// Exhaustive search over every (feature, midpoint between consecutive
/// distinct values). Returns the maximal-gain split; near-ties (1e-12) go to
/// the lower feature, then the lower threshold. Empty when no split exists.
inline std::optional<RootSplit> best_root_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                                int num_classes) {
    const std::size_t n = y.size();
    const std::size_t d = x.front().size();
    std::vector<int> parent(num_classes, 0);
    for (int label : y) ++parent[label];
    const double g0 = gini_from_counts(parent);

    std::vector<RootSplit> all;
    for (std::size_t f = 0; f < d; ++f) {
        std::set<double> values;
        for (const auto& row : x) values.insert(row[f]);
        std::vector<double> sorted(values.begin(), values.end());
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            const double thr = (sorted[i] + sorted[i + 1]) / 2.0;
            std::vector<int> left(num_classes, 0), right(num_classes, 0);
            int nl = 0;
            for (std::size_t r = 0; r < n; ++r) {
                if (x[r][f] <= thr) {
                    ++left[y[r]];
                    ++nl;
                } else {
                    ++right[y[r]];
                }
            }
            const double wl = static_cast<double>(nl) / n;
            const double gain = g0 - wl * gini_from_counts(left) - (1.0 - wl) * gini_from_counts(right);
            all.push_back({static_cast<int>(f), thr, gain});
        }
    }
    if (all.empty()) return std::nullopt;
    double best_gain = all.front().gain;
    for (const auto& s : all) best_gain = std::max(best_gain, s.gain);
    std::vector<RootSplit> ties;
    for (const auto& s : all) {
        if (s.gain >= best_gain - 1e-12) ties.push_back(s);
    }
    return *std::min_element(ties.begin(), ties.end(), [](const RootSplit& a, const RootSplit& b) {
        return a.feature < b.feature || (a.feature == b.feature && a.threshold < b.threshold);
    });
}

/// Central differences of f at p with step h per coordinate.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> p, double h = 1e-6) {
    std::vector<double> g(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double orig = p[j];
        p[j] = orig + h;
        const double up = f(p);
        p[j] = orig - h;
        const double down = f(p);
        p[j] = orig;
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ‖a − b‖₂ / max(‖a‖₂, ‖b‖₂, 1e-12).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace oracle
