#include "xclus/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "xclus/errors.hpp"

namespace xclus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grouped {
    Matrix x;                           // noise rows removed
    std::vector<int> labels;            // relabeled 0..k-1 in first-appearance order
    std::vector<std::vector<std::size_t>> members;
    Matrix centroids;
    int k = 0;
};

Grouped group(const Matrix& x, const std::vector<int>& labels) {
    if (labels.size() != x.rows()) {
        throw Error(Errc::RowMismatch, "labels/rows: " + std::to_string(labels.size()) + "/" +
                                           std::to_string(x.rows()));
    }
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= 0) kept.push_back(i);
    }
    Grouped g;
    g.x = x.select_rows(kept);
    std::map<int, int> remap;
    for (std::size_t i : kept) {
        auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
        g.labels.push_back(it->second);
    }
    g.k = static_cast<int>(remap.size());
    g.members.resize(g.k);
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
        g.members[g.labels[i]].push_back(i);
    }
    g.centroids = Matrix(g.k, x.cols());
    for (int c = 0; c < g.k; ++c) {
        for (std::size_t i : g.members[c]) {
            for (std::size_t j = 0; j < x.cols(); ++j) g.centroids(c, j) += g.x(i, j);
        }
        for (std::size_t j = 0; j < x.cols(); ++j) {
            g.centroids(c, j) /= static_cast<double>(g.members[c].size());
        }
    }
    return g;
}

void require_clusters(const Grouped& g, int minimum) {
    if (g.k < minimum) {
        throw Error(Errc::TooFewClusters,
                    "need >= " + std::to_string(minimum) + " clusters, got " + std::to_string(g.k));
    }
}

}  // namespace

double silhouette(const Matrix& x, const std::vector<int>& labels) {
    const Grouped g = group(x, labels);
    require_clusters(g, 2);
    const std::size_t n = g.x.rows();

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int own = g.labels[i];
        if (g.members[own].size() == 1) continue;  // singleton scores 0
        double a = 0.0;
        for (std::size_t j : g.members[own]) {
            if (j != i) a += euclidean(g.x.row(i), g.x.row(j));
        }
        a /= static_cast<double>(g.members[own].size() - 1);

        double b = kInf;
        for (int c = 0; c < g.k; ++c) {
            if (c == own) continue;
            double mean = 0.0;
            for (std::size_t j : g.members[c]) mean += euclidean(g.x.row(i), g.x.row(j));
            mean /= static_cast<double>(g.members[c].size());
            b = std::min(b, mean);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

double davies_bouldin(const Matrix& x, const std::vector<int>& labels) {
    const Grouped g = group(x, labels);
    require_clusters(g, 2);

    std::vector<double> scatter(g.k, 0.0);
    for (int c = 0; c < g.k; ++c) {
        for (std::size_t i : g.members[c]) scatter[c] += euclidean(g.x.row(i), g.centroids.row(c));
        scatter[c] /= static_cast<double>(g.members[c].size());
    }
    double sum = 0.0;
    for (int i = 0; i < g.k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < g.k; ++j) {
            if (i == j) continue;
            const double m = euclidean(g.centroids.row(i), g.centroids.row(j));
            if (m == 0.0) throw Error(Errc::CoincidentCentroids, "clusters " + std::to_string(i) +
                                                                     "," + std::to_string(j));
            worst = std::max(worst, (scatter[i] + scatter[j]) / m);
        }
        sum += worst;
    }
    return sum / static_cast<double>(g.k);
}

double calinski_harabasz(const Matrix& x, const std::vector<int>& labels) {
    const Grouped g = group(x, labels);
    require_clusters(g, 2);
    const std::size_t n = g.x.rows();
    if (n <= static_cast<std::size_t>(g.k)) {
        throw Error(Errc::TooFewClusters, "CHI requires n > k");
    }

    std::vector<double> global(g.x.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g.x.cols(); ++j) global[j] += g.x(i, j);
    }
    for (double& v : global) v /= static_cast<double>(n);

    double bgss = 0.0;
    for (int c = 0; c < g.k; ++c) {
        bgss += static_cast<double>(g.members[c].size()) *
                squared_distance(g.centroids.row(c), std::span<const double>(global));
    }
    double wgss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wgss += squared_distance(g.x.row(i), g.centroids.row(g.labels[i]));
    }
    if (wgss == 0.0) return kInf;
    return (bgss / static_cast<double>(g.k - 1)) /
           (wgss / static_cast<double>(n - static_cast<std::size_t>(g.k)));
}

double dunn_index(const Matrix& x, const std::vector<int>& labels) {
    const Grouped g = group(x, labels);
    require_clusters(g, 2);

    double min_inter = kInf;
    for (int a = 0; a < g.k; ++a) {
        for (int b = a + 1; b < g.k; ++b) {
            for (std::size_t i : g.members[a]) {
                for (std::size_t j : g.members[b]) {
                    min_inter = std::min(min_inter, euclidean(g.x.row(i), g.x.row(j)));
                }
            }
        }
    }
    double max_diameter = 0.0;
    for (int c = 0; c < g.k; ++c) {
        const auto& m = g.members[c];
        for (std::size_t a = 0; a < m.size(); ++a) {
            for (std::size_t b = a + 1; b < m.size(); ++b) {
                max_diameter = std::max(max_diameter, euclidean(g.x.row(m[a]), g.x.row(m[b])));
            }
        }
    }
    if (max_diameter == 0.0) return kInf;
    return min_inter / max_diameter;
}

double pbm_index(const Matrix& x, const std::vector<int>& labels) {
    const Grouped g = group(x, labels);
    require_clusters(g, 2);
    const std::size_t n = g.x.rows();

    std::vector<double> global(g.x.cols(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g.x.cols(); ++j) global[j] += g.x(i, j);
    }
    for (double& v : global) v /= static_cast<double>(n);

    double e1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e1 += euclidean(g.x.row(i), std::span<const double>(global));
    }
    double ek = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ek += euclidean(g.x.row(i), g.centroids.row(g.labels[i]));
    }
    double dk = 0.0;
    for (int a = 0; a < g.k; ++a) {
        for (int b = a + 1; b < g.k; ++b) {
            dk = std::max(dk, euclidean(g.centroids.row(a), g.centroids.row(b)));
        }
    }
    if (ek == 0.0) return kInf;
    const double v = (1.0 / static_cast<double>(g.k)) * (e1 / ek) * dk;
    return v * v;
}

double xie_beni(const Matrix& x, const Matrix& membership, const Matrix& centers) {
    const std::size_t n = x.rows();
    const std::size_t k = centers.rows();
    if (membership.rows() != n || membership.cols() != k) {
        throw Error(Errc::RowMismatch, "membership must be n x k");
    }
    double min_sep = kInf;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            min_sep = std::min(min_sep, squared_distance(centers.row(a), centers.row(b)));
        }
    }
    if (min_sep == 0.0) throw Error(Errc::CoincidentCenters, "identical cluster centers");

    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double u = membership(i, j);
            num += u * u * squared_distance(x.row(i), centers.row(j));
        }
    }
    return num / (static_cast<double>(n) * min_sep);
}

double xie_beni_crisp(const Matrix& x, const std::vector<int>& labels, const Matrix& centers) {
    const Grouped g = group(x, labels);
    Matrix u(g.x.rows(), centers.rows());
    for (std::size_t i = 0; i < g.x.rows(); ++i) u(i, g.labels[i]) = 1.0;
    return xie_beni(g.x, u, centers);
}

ValidityReport validity_report(const Matrix& x, const std::vector<int>& labels,
                               const Matrix* centers) {
    ValidityReport report;
    const Grouped g = group(x, labels);
    report.k = g.k;
    report.n_used = static_cast<int>(g.x.rows());

    auto attempt = [](auto&& fn) -> std::optional<double> {
        try {
            return fn();
        } catch (const Error&) {
            return std::nullopt;
        }
    };
    report.silhouette = attempt([&] { return silhouette(x, labels); });
    report.dbi = attempt([&] { return davies_bouldin(x, labels); });
    report.chi = attempt([&] { return calinski_harabasz(x, labels); });
    report.dunn = attempt([&] { return dunn_index(x, labels); });
    report.pbm = attempt([&] { return pbm_index(x, labels); });
    report.xie_beni = attempt([&] {
        if (g.k < 2) throw Error(Errc::TooFewClusters, "xie-beni needs >= 2 clusters");
        return xie_beni_crisp(x, labels, centers ? *centers : g.centroids);
    });
    return report;
}

namespace {

// midranks of the pooled sample, doubled so ties stay integral
std::vector<std::int64_t> doubled_midranks(const std::vector<double>& pooled_sorted) {
    const std::size_t n = pooled_sorted.size();
    std::vector<std::int64_t> ranks2(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled_sorted[j + 1] == pooled_sorted[i]) ++j;
        // midrank of positions i..j (1-based) is (i+1 + j+1)/2; doubled: i+j+2
        const std::int64_t r2 = static_cast<std::int64_t>(i + j + 2);
        for (std::size_t t = i; t <= j; ++t) ranks2[t] = r2;
        i = j + 1;
    }
    return ranks2;
}

double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw Error(Errc::EmptySample, "both samples must be non-empty");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t n = n1 + n2;

    std::vector<std::pair<double, int>> pooled;  // (value, sample tag)
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = pooled[i].first;
    const std::vector<std::int64_t> ranks2 = doubled_midranks(values);

    std::int64_t rank2_a = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pooled[i].second == 0) rank2_a += ranks2[i];
    }
    // U = R_a - n1(n1+1)/2; doubled: U2 = 2U
    const std::int64_t u2 =
        rank2_a - static_cast<std::int64_t>(n1) * (static_cast<std::int64_t>(n1) + 1);
    MannWhitneyResult result;
    result.u = static_cast<double>(u2) / 2.0;

    const std::int64_t mu2 = static_cast<std::int64_t>(n1) * static_cast<std::int64_t>(n2);
    if (n <= 12) {
        // exact distribution of U2 over all C(n, n1) assignments via DP on
        // (items taken, doubled rank sum)
        std::int64_t max_sum = 0;
        for (std::size_t i = 0; i < n; ++i) max_sum += ranks2[i];
        std::vector<std::vector<std::int64_t>> ways(
            n1 + 1, std::vector<std::int64_t>(static_cast<std::size_t>(max_sum) + 1, 0));
        ways[0][0] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = std::min(i + 1, n1); c-- > 0;) {
                for (std::int64_t s = max_sum - ranks2[i]; s >= 0; --s) {
                    if (ways[c][static_cast<std::size_t>(s)]) {
                        ways[c + 1][static_cast<std::size_t>(s + ranks2[i])] +=
                            ways[c][static_cast<std::size_t>(s)];
                    }
                }
            }
        }
        const std::int64_t offset =
            static_cast<std::int64_t>(n1) * (static_cast<std::int64_t>(n1) + 1);
        const std::int64_t dev = std::llabs(u2 - mu2);
        std::int64_t favorable = 0;
        std::int64_t total = 0;
        for (std::int64_t s = 0; s <= max_sum; ++s) {
            const std::int64_t count = ways[n1][static_cast<std::size_t>(s)];
            if (!count) continue;
            total += count;
            if (std::llabs(s - offset - mu2) >= dev) favorable += count;
        }
        result.exact = true;
        result.p_two_sided = static_cast<double>(favorable) / static_cast<double>(total);
        return result;
    }

    // normal approximation with tie-corrected variance and continuity correction
    std::map<std::int64_t, std::size_t> tie_groups;
    for (std::size_t i = 0; i < n; ++i) ++tie_groups[ranks2[i]];
    double tie_term = 0.0;
    for (const auto& [rank, t] : tie_groups) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double nd = static_cast<double>(n);
    const double variance = (static_cast<double>(n1) * static_cast<double>(n2) / 12.0) *
                            ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (variance <= 0.0) {
        result.p_two_sided = 1.0;
        return result;
    }
    const double mu = static_cast<double>(mu2) / 2.0;
    const double u = result.u;
    double z = 0.0;
    if (u > mu) z = (u - mu - 0.5) / std::sqrt(variance);
    else if (u < mu) z = (u - mu + 0.5) / std::sqrt(variance);
    result.p_two_sided = std::min(1.0, 2.0 * std_normal_sf(std::abs(z)));
    return result;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ClusterProfile characterize_clusters(const Dataset& validation, const std::vector<int>& labels,
                                     double alpha, const std::vector<std::string>& display_labels) {
    if (labels.size() != validation.rows()) {
        throw Error(Errc::RowMismatch, "validation rows must align with labels");
    }
    std::map<int, std::size_t> sizes;
    for (int l : labels) {
        if (l >= 0) ++sizes[l];
    }
    if (sizes.size() < 2) {
        throw Error(Errc::TooFewClusters, "characterization needs two clusters");
    }
    // two most populous clusters; ties resolved by smaller label id
    std::vector<std::pair<int, std::size_t>> order(sizes.begin(), sizes.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    ClusterProfile profile;
    profile.alpha = alpha;
    profile.cluster_a = order[0].first;
    profile.cluster_b = order[1].first;
    if (display_labels.size() > static_cast<std::size_t>(std::max(profile.cluster_a, profile.cluster_b))) {
        profile.label_a = display_labels[profile.cluster_a];
        profile.label_b = display_labels[profile.cluster_b];
    } else {
        profile.label_a = "cluster-" + std::to_string(profile.cluster_a);
        profile.label_b = "cluster-" + std::to_string(profile.cluster_b);
    }

    for (std::size_t j = 0; j < validation.cols(); ++j) {
        std::vector<double> ga, gb;
        for (std::size_t i = 0; i < validation.rows(); ++i) {
            if (labels[i] == profile.cluster_a) ga.push_back(validation.values(i, j));
            else if (labels[i] == profile.cluster_b) gb.push_back(validation.values(i, j));
        }
        ClusterProfileRow row;
        row.feature = validation.feature_names[j];
        row.mean_a = std::accumulate(ga.begin(), ga.end(), 0.0) / static_cast<double>(ga.size());
        row.mean_b = std::accumulate(gb.begin(), gb.end(), 0.0) / static_cast<double>(gb.size());
        row.median_a = median_of(ga);
        row.median_b = median_of(gb);
        const MannWhitneyResult mw = mann_whitney_u(ga, gb);
        row.u = mw.u;
        row.p = mw.p_two_sided;
        row.significant = mw.p_two_sided < alpha;
        profile.rows.push_back(std::move(row));
    }
    return profile;
}

}  // namespace xclus
