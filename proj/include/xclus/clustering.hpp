#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xclus/matrix.hpp"

namespace xclus {

enum class Algorithm { kmeans, fuzzy_cmeans, dbscan, spectral };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ClusteringConfig {
    Algorithm algorithm = Algorithm::kmeans;
    int k = 2;                  // kmeans / fuzzy / spectral
    double eps = 0.5;           // dbscan
    int min_samples = 5;        // dbscan
    double fuzzifier = 2.0;     // fuzzy, m > 1
    std::uint64_t seed = 0;
    int restarts = 10;
    int max_iter = 300;
    double tol = 1e-6;
    int spectral_cap = 2000;    // subsample above this row count, with a warning

    bool operator==(const ClusteringConfig&) const = default;
};

struct Assignment {
    std::vector<int> labels;              // -1 = noise; others contiguous 0..k-1
    std::optional<Matrix> centroids;      // centroid-based algorithms only
    std::optional<double> inertia;
    std::map<std::string, std::string> metadata;

    int n_clusters() const;

    bool operator==(const Assignment&) const = default;
};

struct FuzzyAssignment {
    Matrix membership;  // n x k, rows sum to 1
    Matrix centers;     // k x d
    double objective = 0.0;
    std::vector<double> objective_trace;

    std::vector<int> hardened() const;  // argmax membership per row
};

Assignment kmeans(const Matrix& x, const ClusteringConfig& cfg);
FuzzyAssignment fuzzy_cmeans(const Matrix& x, const ClusteringConfig& cfg);
Assignment dbscan(const Matrix& x, const ClusteringConfig& cfg);
Assignment spectral(const Matrix& x, const ClusteringConfig& cfg);

struct ElbowResult {
    int k = 0;
    std::vector<int> ks;
    std::vector<double> inertia;
    std::vector<double> silhouettes;
    bool tie_break_used = false;
    std::string rule = "argmax of second forward difference of inertia";
};

// Knee positions on a raw inertia curve: indices maximizing the second
// forward difference (all tied maxima returned, in order).
std::vector<std::size_t> knee_candidates(const std::vector<double>& inertia);

ElbowResult elbow_select_k(const Matrix& x, int k_min, int k_max, std::uint64_t seed,
                           int restarts = 10);

struct DbscanGridCell {
    double eps = 0.0;
    int min_samples = 0;
    double silhouette = 0.0;  // -inf for invalid cells
    int n_clusters = 0;
    double noise_fraction = 0.0;
    bool valid = false;
};

struct DbscanGridResult {
    double eps = 0.0;
    int min_samples = 0;
    double silhouette = 0.0;
    std::vector<DbscanGridCell> table;
    std::string note = "silhouette over non-noise points; cells with <2 clusters or >50% noise scored -inf";
};

DbscanGridResult grid_search_dbscan(const Matrix& x, const std::vector<double>& eps_grid,
                                    const std::vector<int>& min_samples_grid);

}  // namespace xclus
