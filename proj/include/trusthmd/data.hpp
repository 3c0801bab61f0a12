#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trusthmd/core.hpp"

namespace trusthmd {

/// Column layout of a feature CSV. An empty feature_columns list means every
/// column other than the label and app-id columns. Without a label column all
/// samples are unlabeled; without an app-id column samples get "row-<line>".
struct CsvSchema {
    std::optional<std::string> label_column = "label";
    std::optional<std::string> app_id_column = "app";
    std::vector<std::string> feature_columns;
};

/// Strict CSV ingestion: UTF-8, comma separated, header row, decimal floats.
/// An empty label cell marks an unlabeled sample; any other label must be one
/// of class_names. Any bad row fails the whole load (non-finite rows are all
/// listed in the message).
Dataset load_csv(const std::string& path, const CsvSchema& schema, const std::vector<std::string>& class_names);
Dataset parse_csv(std::string_view text, const CsvSchema& schema, const std::vector<std::string>& class_names);

/// Writes `f0..f{d-1},label,app` with features in shortest round-trip form.
void write_csv(const Dataset& data, const std::string& path);

/// Dataset description shipped next to a CSV (JSON). See README.
struct Manifest {
    std::vector<std::string> classes{"benign", "malware"};
    std::string positive_class = "malware";
    CsvSchema schema;
    std::vector<std::string> unknown_app_ids;
    double test_fraction = 0.25;
    std::uint64_t split_seed = 0;

    Label positive_label() const;
};

Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& manifest, const std::string& path);

struct DatasetTaxonomy {
    Dataset train;
    Dataset test_known;
    Dataset unknown;
};

/// Samples whose app_id is listed go to `unknown`; the rest are split into
/// train/test, stratified by class, deterministically under `seed`. The total
/// test size is round(n_known * test_fraction), allotted to classes by
/// largest remainder, so each class is within ±1 of its exact share.
DatasetTaxonomy split_taxonomy(const Dataset& data, const std::set<std::string>& unknown_app_ids,
                               double test_fraction, std::uint64_t seed);

enum class SyntheticRegime { ood, overlap };

std::string_view to_string(SyntheticRegime r) noexcept;
SyntheticRegime parse_regime(std::string_view s);

struct SyntheticSpec {
    SyntheticRegime regime = SyntheticRegime::ood;
    std::size_t n_train = 2000;
    std::size_t n_test = 500;
    std::size_t n_unknown = 500;
    std::size_t dim = 8;
    double class_separation = 6.0;  // in units of sigma
    double ood_distance = 20.0;     // from each class mean, in units of sigma
    std::uint64_t seed = 0;

    void validate() const;
};

/// App id carried by every sample of the ood-regime unknown cluster.
inline constexpr std::string_view kOodAppId = "unknown-ood";

/// Two unit-variance isotropic Gaussian classes (benign=0, malware=1) with
/// means at ∓(separation/2)·u, u = (1,…,1)/√d. Classes alternate by index,
/// so every bucket is balanced.
///
/// ood: unknown samples are unlabeled and drawn around h·v, where
/// v ∝ (1,−1,1,−1,…) is orthogonal to u and h is chosen so the centre lies
/// ood_distance from both class means. Needs d ≥ 2.
/// overlap: unknown samples come from the known mixture (labeled) but with
/// app ids never used by the known buckets.
DatasetTaxonomy generate_synthetic(const SyntheticSpec& spec);

/// The inter-mean unit direction u used by generate_synthetic.
std::vector<double> synthetic_class_axis(std::size_t dim);

}  // namespace trusthmd
