#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xclus/dataset.hpp"
#include "xclus/matrix.hpp"

namespace xclus {

// Label-free clustering quality scores. Noise rows (label -1) are excluded
// from every index; n_used records how many rows were scored. Unbounded
// limits (e.g. zero within-cluster scatter) surface as +infinity here and are
// rendered as "unbounded" by report serializers, never as a float infinity.
struct ValidityReport {
    std::optional<double> silhouette;
    std::optional<double> dbi;
    std::optional<double> chi;
    std::optional<double> dunn;
    std::optional<double> pbm;
    std::optional<double> xie_beni;
    int k = 0;
    int n_used = 0;

    bool operator==(const ValidityReport&) const = default;
};

double silhouette(const Matrix& x, const std::vector<int>& labels);
double davies_bouldin(const Matrix& x, const std::vector<int>& labels);
double calinski_harabasz(const Matrix& x, const std::vector<int>& labels);
double dunn_index(const Matrix& x, const std::vector<int>& labels);
double pbm_index(const Matrix& x, const std::vector<int>& labels);

// Crisp labels are scored as 0/1 memberships.
double xie_beni(const Matrix& x, const Matrix& membership, const Matrix& centers);
double xie_beni_crisp(const Matrix& x, const std::vector<int>& labels, const Matrix& centers);

// Every index that applies, individual failures left empty.
ValidityReport validity_report(const Matrix& x, const std::vector<int>& labels,
                               const Matrix* centers = nullptr);

struct MannWhitneyResult {
    double u = 0.0;            // U statistic of the first sample
    double p_two_sided = 1.0;  // exact (n1+n2 <= 12) or tie-corrected normal approximation
    bool exact = false;
};

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

struct ClusterProfileRow {
    std::string feature;
    double mean_a = 0.0, mean_b = 0.0;
    double median_a = 0.0, median_b = 0.0;
    double u = 0.0;
    double p = 1.0;
    bool significant = false;

    bool operator==(const ClusterProfileRow&) const = default;
};

struct ClusterProfile {
    std::vector<ClusterProfileRow> rows;
    double alpha = 0.05;
    int cluster_a = 0, cluster_b = 1;  // the two groups compared (largest first)
    std::string label_a = "cluster-0", label_b = "cluster-1";

    bool operator==(const ClusterProfile&) const = default;
};

// Per validation feature: group statistics, Mann-Whitney U/p and a
// significance flag at alpha. Defined for two groups; with more realized
// clusters the two most populous are compared (recorded in the profile).
ClusterProfile characterize_clusters(const Dataset& validation, const std::vector<int>& labels,
                                     double alpha = 0.05,
                                     const std::vector<std::string>& display_labels = {});

}  // namespace xclus
