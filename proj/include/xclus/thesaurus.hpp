#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xclus/clustering.hpp"
#include "xclus/dataset.hpp"
#include "xclus/explainers.hpp"
#include "xclus/surrogate.hpp"
#include "xclus/validity.hpp"

namespace xclus {

enum class RunStatus { ok, failed, skipped };

std::string to_string(RunStatus s);

struct BenchmarkRow {
    std::string variant;
    std::string algorithm;  // includes the reserved names "hdbscan"/"robp" for skipped rows
    std::string hyperparameters;
    ClusteringConfig config;
    ValidityReport validity;
    int k = 0;
    double wall_time_s = 0.0;  // diagnostics only, never serialized
    RunStatus status = RunStatus::ok;
    std::string reason;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
    std::uint64_t seed = 0;
    // how the paper-style combination count is reached with this grid
    std::string accounting;

    // Columns exactly: variant, algorithm, silhouette, dbi, chi, dunn, pbm,
    // xie_beni, k, status. Unbounded values render as "unbounded".
    std::string to_csv() const;
};

struct BenchmarkOptions {
    std::uint64_t seed = 0;
    int jobs = 0;
    int k_min = 2;
    int k_max = 8;
    int restarts = 10;
    int spectral_cap = 2000;
    std::vector<double> eps_grid;      // empty -> scaled from the data
    std::vector<int> min_samples_grid; // empty -> {3, 5, 10}
    bool include_reserved_rows = false;  // emit skipped hdbscan/robp rows
};

BenchmarkReport run_benchmark(const std::map<std::string, Dataset>& variants,
                              const std::vector<Algorithm>& algorithms,
                              const BenchmarkOptions& options);

enum class Criterion { silhouette, dbi, chi, dunn, pbm, xie_beni };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct Winner {
    std::string variant;
    ClusteringConfig config;
    ValidityReport validity;
    std::string rationale;
};

// argmax of the criterion over ok rows (respecting its direction); exact ties
// broken by lower DBI, then higher CHI, then row order.
Winner select_best(const BenchmarkReport& report, Criterion criterion = Criterion::silhouette);

struct Exemplar {
    std::string instance_id;
    std::vector<double> features_original;  // via NormalizationStats inverse
    int cluster = 0;
    std::string cluster_label;
    FeatureImportanceVector lime;
    double fidelity = 0.0;

    bool operator==(const Exemplar&) const = default;
};

struct DatasetFingerprint {
    std::string schema_hash;  // sha256 over the ordered feature names
    std::size_t rows = 0;
    std::size_t cols = 0;

    bool operator==(const DatasetFingerprint&) const = default;
};

DatasetFingerprint fingerprint_of(const Dataset& ds);

struct Thesaurus {
    std::string version = "1";
    DatasetFingerprint fingerprint;
    std::string variant;
    ClusteringConfig config;
    ValidityReport validity;
    std::vector<std::string> cluster_labels;  // display label per cluster id
    ClusterProfile profile;
    LinearSurrogate surrogate;
    double surrogate_accuracy = 0.0;
    double surrogate_f1 = 0.0;
    NormalizationStats normalization;
    std::vector<Exemplar> bank;
    std::string domain_preamble;
    std::map<std::string, std::string> glossary;  // feature -> plain-language description

    const Exemplar* find_exemplar(const std::string& instance_id) const;

    bool operator==(const Thesaurus&) const = default;
};

struct ThesaurusBuildInputs {
    const Dataset* dataset = nullptr;  // normalized training data of the winner
    std::string variant;
    ClusteringConfig config;
    ValidityReport validity;
    const Assignment* assignment = nullptr;
    ClusterProfile profile;
    std::vector<std::string> cluster_labels;
    const LinearSurrogate* surrogate = nullptr;
    EvalResult surrogate_eval;
    NormalizationStats normalization;
    std::vector<std::string> exemplar_ids;  // row ids "<entity>@<timestamp>"
    LimeConfig lime;
    std::string domain_preamble;
    std::map<std::string, std::string> glossary;
    int jobs = 0;
};

// Runs LIME per exemplar against the surrogate; exemplars whose explanation
// fails are skipped with a warning, and an empty resulting bank is an error.
Thesaurus build_thesaurus(const ThesaurusBuildInputs& in,
                          std::vector<std::string>* warnings = nullptr);

// File format: pretty-printed JSON payload (stable key order, embedded
// version) followed by a "sha256:<hex>" footer over the payload bytes.
void save_thesaurus(const Thesaurus& t, const std::string& path);
Thesaurus load_thesaurus(const std::string& path);

}  // namespace xclus
