#include "xclus/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "xclus/errors.hpp"
#include "xclus/rng.hpp"
#include "xclus/validity.hpp"

namespace xclus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relabel so cluster ids appear in first-row order; keeps outputs invariant
// under internal enumeration details. Reorders centroid rows to match.
void canonicalize(std::vector<int>& labels, Matrix* centroids) {
    std::map<int, int> remap;
    for (int& l : labels) {
        if (l < 0) continue;
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    if (centroids && !remap.empty()) {
        Matrix reordered(remap.size(), centroids->cols());
        for (const auto& [old_id, new_id] : remap) {
            if (static_cast<std::size_t>(old_id) < centroids->rows()) {
                reordered.set_row(new_id, centroids->row(old_id));
            }
        }
        *centroids = std::move(reordered);
    }
}

// k-means++ seeding: first center uniform, then D^2 sampling.
Matrix kmeanspp_centers(const Matrix& x, int k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix centers(k, x.cols());
    centers.set_row(0, x.row(rng.index(n)));
    std::vector<double> d2(n, kInf);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(x.row(i), centers.row(c - 1)));
            total += d2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.index(n);
        }
        centers.set_row(c, x.row(chosen));
    }
    return centers;
}

struct LloydRun {
    std::vector<int> labels;
    Matrix centers;
    double inertia = 0.0;
};

LloydRun lloyd(const Matrix& x, int k, int max_iter, double tol, Rng rng) {
    const std::size_t n = x.rows();
    LloydRun run;
    run.centers = kmeanspp_centers(x, k, rng);
    run.labels.assign(n, 0);

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step; ties go to the lowest cluster index
        run.inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = kInf;
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(x.row(i), run.centers.row(c));
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            run.labels[i] = best_c;
            run.inertia += best;
        }

        Matrix next(k, x.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[run.labels[i]];
            for (std::size_t j = 0; j < x.cols(); ++j) next(run.labels[i], j) += x(i, j);
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // re-seed an empty cluster at the point farthest from its center
                double worst = -1.0;
                std::size_t pick = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = squared_distance(x.row(i), run.centers.row(run.labels[i]));
                    if (d > worst) {
                        worst = d;
                        pick = i;
                    }
                }
                next.set_row(c, x.row(pick));
                counts[c] = 1;
                run.labels[pick] = c;
                continue;
            }
            for (std::size_t j = 0; j < x.cols(); ++j) {
                next(c, j) /= static_cast<double>(counts[c]);
            }
        }

        double shift = 0.0;
        for (int c = 0; c < k; ++c) shift += squared_distance(next.row(c), run.centers.row(c));
        run.centers = std::move(next);
        if (shift < tol * tol) break;
    }

    // final assignment against the converged centers
    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = kInf;
        int best_c = 0;
        for (int c = 0; c < k; ++c) {
            const double d = squared_distance(x.row(i), run.centers.row(c));
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        run.labels[i] = best_c;
        run.inertia += best;
    }
    return run;
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kmeans: return "kmeans";
        case Algorithm::fuzzy_cmeans: return "fuzzy_cmeans";
        case Algorithm::dbscan: return "dbscan";
        case Algorithm::spectral: return "spectral";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "kmeans") return Algorithm::kmeans;
    if (s == "fuzzy_cmeans") return Algorithm::fuzzy_cmeans;
    if (s == "dbscan") return Algorithm::dbscan;
    if (s == "spectral") return Algorithm::spectral;
    throw Error(Errc::ConfigError, "unknown algorithm: " + s);
}

int Assignment::n_clusters() const {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    return k;
}

Assignment kmeans(const Matrix& x, const ClusteringConfig& cfg) {
    const std::size_t n = x.rows();
    if (cfg.k < 1 || n < static_cast<std::size_t>(cfg.k)) {
        throw Error(Errc::DegenerateInput,
                    "kmeans needs n >= k (n=" + std::to_string(n) + ", k=" + std::to_string(cfg.k) + ")");
    }
    Rng base(cfg.seed);
    LloydRun best;
    best.inertia = kInf;
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        LloydRun run = lloyd(x, cfg.k, cfg.max_iter, cfg.tol, base.fork(r));
        if (run.inertia < best.inertia) best = std::move(run);
    }
    Assignment out;
    out.labels = std::move(best.labels);
    Matrix centroids = std::move(best.centers);
    canonicalize(out.labels, &centroids);
    out.centroids = std::move(centroids);
    out.inertia = best.inertia;
    return out;
}

std::vector<int> FuzzyAssignment::hardened() const {
    std::vector<int> labels(membership.rows(), 0);
    for (std::size_t i = 0; i < membership.rows(); ++i) {
        double best = -1.0;
        for (std::size_t j = 0; j < membership.cols(); ++j) {
            if (membership(i, j) > best) {
                best = membership(i, j);
                labels[i] = static_cast<int>(j);
            }
        }
    }
    return labels;
}

FuzzyAssignment fuzzy_cmeans(const Matrix& x, const ClusteringConfig& cfg) {
    const std::size_t n = x.rows();
    const int k = cfg.k;
    if (cfg.fuzzifier <= 1.0) throw Error(Errc::ConfigError, "fuzzifier m must be > 1");
    if (k < 1 || n < static_cast<std::size_t>(k)) {
        throw Error(Errc::DegenerateInput, "fuzzy_cmeans needs n >= k");
    }
    const double m = cfg.fuzzifier;
    const double exponent = 2.0 / (m - 1.0);
    Rng base(cfg.seed);

    FuzzyAssignment best;
    best.objective = kInf;
    std::vector<double> d(k);
    for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
        Rng rng = base.fork(r);
        Matrix centers = kmeanspp_centers(x, k, rng);
        Matrix u(n, k);
        std::vector<double> trace;
        double objective = kInf;

        for (int iter = 0; iter < cfg.max_iter; ++iter) {
            // membership update; a point exactly on a center owns it fully
            for (std::size_t i = 0; i < n; ++i) {
                int coincident = -1;
                for (int c = 0; c < k; ++c) {
                    d[c] = squared_distance(x.row(i), centers.row(c));
                    if (d[c] == 0.0 && coincident < 0) coincident = c;
                }
                if (coincident >= 0) {
                    for (int c = 0; c < k; ++c) u(i, c) = (c == coincident) ? 1.0 : 0.0;
                    continue;
                }
                for (int c = 0; c < k; ++c) {
                    double denom = 0.0;
                    for (int l = 0; l < k; ++l) denom += std::pow(d[c] / d[l], exponent / 2.0);
                    u(i, c) = 1.0 / denom;
                }
            }
            // center update
            Matrix next(k, x.cols());
            for (int c = 0; c < k; ++c) {
                double weight = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double w = std::pow(u(i, c), m);
                    weight += w;
                    for (std::size_t j = 0; j < x.cols(); ++j) next(c, j) += w * x(i, j);
                }
                for (std::size_t j = 0; j < x.cols(); ++j) {
                    next(c, j) = weight > 0.0 ? next(c, j) / weight : centers(c, j);
                }
            }
            centers = std::move(next);

            double next_objective = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (int c = 0; c < k; ++c) {
                    next_objective +=
                        std::pow(u(i, c), m) * squared_distance(x.row(i), centers.row(c));
                }
            }
            trace.push_back(next_objective);
            const bool converged = iter > 0 && objective - next_objective < cfg.tol;
            objective = next_objective;
            if (converged) break;
        }

        if (objective < best.objective) {
            best.membership = std::move(u);
            best.centers = std::move(centers);
            best.objective = objective;
            best.objective_trace = std::move(trace);
        }
    }
    return best;
}

Assignment dbscan(const Matrix& x, const ClusteringConfig& cfg) {
    if (cfg.eps <= 0.0) throw Error(Errc::ConfigError, "eps must be > 0");
    if (cfg.min_samples < 1) throw Error(Errc::ConfigError, "min_samples must be >= 1");
    const std::size_t n = x.rows();
    const double eps2 = cfg.eps * cfg.eps;

    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
        neighbors[i].push_back(i);  // a point counts itself
        for (std::size_t j = i + 1; j < n; ++j) {
            if (squared_distance(x.row(i), x.row(j)) <= eps2) {
                neighbors[i].push_back(j);
                neighbors[j].push_back(i);
            }
        }
    }
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(cfg.min_samples);
    }

    Assignment out;
    out.labels.assign(n, -1);
    int next_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i] || out.labels[i] != -1) continue;
        const int label = next_label++;
        std::vector<std::size_t> frontier = {i};
        out.labels[i] = label;
        while (!frontier.empty()) {
            const std::size_t p = frontier.back();
            frontier.pop_back();
            if (!core[p]) continue;  // border points do not expand
            for (std::size_t q : neighbors[p]) {
                if (out.labels[q] == -1) {
                    out.labels[q] = label;
                    if (core[q]) frontier.push_back(q);
                }
            }
        }
    }
    out.metadata["eps"] = std::to_string(cfg.eps);
    out.metadata["min_samples"] = std::to_string(cfg.min_samples);
    return out;
}

Assignment spectral(const Matrix& x, const ClusteringConfig& cfg) {
    const std::size_t n = x.rows();
    if (cfg.k < 1 || n < static_cast<std::size_t>(cfg.k)) {
        throw Error(Errc::DegenerateInput, "spectral needs n >= k");
    }
    Assignment out;
    if (cfg.k == 1) {
        out.labels.assign(n, 0);
        return out;
    }

    // subsample above the cap; out-of-sample rows join the nearest cluster
    // mean in input space
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;
    bool subsampled = false;
    const std::size_t cap = std::max<std::size_t>(cfg.spectral_cap, cfg.k);
    if (n > cap) {
        Rng rng(Rng::splitmix64(cfg.seed ^ 0x5bd1e995));
        active = rng.sample_without_replacement(n, cap);
        std::sort(active.begin(), active.end());
        subsampled = true;
    }
    const Matrix xs = x.select_rows(active);
    const std::size_t m = xs.rows();

    // RBF affinity, bandwidth = median pairwise distance
    std::vector<double> dists;
    dists.reserve(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            dists.push_back(euclidean(xs.row(i), xs.row(j)));
        }
    }
    double bandwidth = 1.0;
    if (!dists.empty()) {
        const std::size_t mid = dists.size() / 2;
        std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
        bandwidth = dists[mid];
    }
    if (bandwidth <= 0.0) bandwidth = 1.0;

    Matrix w(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d2 = squared_distance(xs.row(i), xs.row(j));
            const double a = std::exp(-d2 / (2.0 * bandwidth * bandwidth));
            w(i, j) = w(j, i) = a;
        }
    }

    std::vector<double> degree(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) degree[i] += w(i, j);
        if (degree[i] < 1e-12) degree[i] = 1e-12;  // isolated vertex
    }
    Matrix laplacian(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double norm = w(i, j) / std::sqrt(degree[i] * degree[j]);
            laplacian(i, j) = (i == j ? 1.0 : 0.0) - norm;
        }
    }

    const EighResult eig = jacobi_eigh(laplacian);
    Matrix embedding(m, cfg.k);
    for (std::size_t i = 0; i < m; ++i) {
        for (int c = 0; c < cfg.k; ++c) embedding(i, c) = eig.eigenvectors(i, c);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double len = norm2(embedding.row(i));
        if (len > 0.0) {
            for (int c = 0; c < cfg.k; ++c) embedding(i, c) /= len;
        }
    }

    ClusteringConfig inner = cfg;
    inner.algorithm = Algorithm::kmeans;
    const Assignment embedded = kmeans(embedding, inner);

    out.labels.assign(n, 0);
    if (!subsampled) {
        out.labels = embedded.labels;
    } else {
        // cluster means of the sampled points in input space
        const int k = cfg.k;
        Matrix means(k, x.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < m; ++i) {
            const int c = embedded.labels[i];
            ++counts[c];
            for (std::size_t j = 0; j < x.cols(); ++j) means(c, j) += xs(i, j);
        }
        for (int c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                if (counts[c]) means(c, j) /= static_cast<double>(counts[c]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double best = kInf;
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(x.row(i), means.row(c));
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            out.labels[i] = best_c;
        }
        out.metadata["subsampled"] = std::to_string(m) + " of " + std::to_string(n);
    }
    canonicalize(out.labels, nullptr);
    out.metadata["bandwidth"] = std::to_string(bandwidth);
    out.metadata["affinity"] = "rbf, bandwidth = median pairwise distance";
    return out;
}

std::vector<std::size_t> knee_candidates(const std::vector<double>& inertia) {
    if (inertia.size() < 3) throw Error(Errc::RangeTooSmall, "need >= 3 inertia points");
    std::vector<double> second(inertia.size() - 2);
    for (std::size_t i = 0; i + 2 < inertia.size(); ++i) {
        second[i] = inertia[i + 2] - 2.0 * inertia[i + 1] + inertia[i];
    }
    const double best = *std::max_element(second.begin(), second.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < second.size(); ++i) {
        if (second[i] == best) out.push_back(i);
    }
    return out;
}

ElbowResult elbow_select_k(const Matrix& x, int k_min, int k_max, std::uint64_t seed,
                           int restarts) {
    if (k_max - k_min + 1 < 3) {
        throw Error(Errc::RangeTooSmall, "elbow needs a contiguous k range of length >= 3");
    }
    ElbowResult result;
    for (int k = k_min; k <= k_max; ++k) {
        ClusteringConfig cfg;
        cfg.algorithm = Algorithm::kmeans;
        cfg.k = k;
        cfg.seed = seed;
        cfg.restarts = restarts;
        const Assignment a = kmeans(x, cfg);
        result.ks.push_back(k);
        result.inertia.push_back(*a.inertia);
        double sil = -kInf;
        if (k >= 2) {
            try {
                sil = silhouette(x, a.labels);
            } catch (const Error&) {
                sil = -kInf;
            }
        }
        result.silhouettes.push_back(sil);
    }

    const std::vector<std::size_t> knees = knee_candidates(result.inertia);
    std::size_t chosen = knees.front();
    if (knees.size() > 1) {
        result.tie_break_used = true;
        double best_sil = -kInf;
        for (std::size_t idx : knees) {
            if (result.silhouettes[idx] > best_sil) {
                best_sil = result.silhouettes[idx];
                chosen = idx;
            }
        }
    }
    result.k = result.ks[chosen];
    return result;
}

DbscanGridResult grid_search_dbscan(const Matrix& x, const std::vector<double>& eps_grid,
                                    const std::vector<int>& min_samples_grid) {
    if (eps_grid.empty() || min_samples_grid.empty()) {
        throw Error(Errc::ConfigError, "grids must be non-empty");
    }
    DbscanGridResult result;
    result.silhouette = -kInf;
    for (double eps : eps_grid) {
        for (int min_samples : min_samples_grid) {
            ClusteringConfig cfg;
            cfg.algorithm = Algorithm::dbscan;
            cfg.eps = eps;
            cfg.min_samples = min_samples;
            const Assignment a = dbscan(x, cfg);

            DbscanGridCell cell;
            cell.eps = eps;
            cell.min_samples = min_samples;
            cell.n_clusters = a.n_clusters();
            std::size_t noise = 0;
            for (int l : a.labels) noise += (l == -1);
            cell.noise_fraction = static_cast<double>(noise) / static_cast<double>(a.labels.size());
            cell.silhouette = -kInf;
            if (cell.n_clusters >= 2 && cell.noise_fraction <= 0.5) {
                try {
                    cell.silhouette = silhouette(x, a.labels);
                    cell.valid = true;
                } catch (const Error&) {
                    cell.silhouette = -kInf;
                }
            }
            if (cell.valid && cell.silhouette > result.silhouette) {
                result.silhouette = cell.silhouette;
                result.eps = eps;
                result.min_samples = min_samples;
            }
            result.table.push_back(cell);
        }
    }
    if (result.silhouette == -kInf) {
        throw Error(Errc::NoValidCell, "no (eps, min_samples) cell produced a scorable clustering");
    }
    return result;
}

}  // namespace xclus
