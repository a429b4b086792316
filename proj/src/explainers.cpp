#include "xclus/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "xclus/csv.hpp"
#include "xclus/errors.hpp"
#include "xclus/rng.hpp"

namespace xclus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int argmax_row(const Matrix& proba, std::size_t row) {
    int best = 0;
    for (std::size_t c = 1; c < proba.cols(); ++c) {
        if (proba(row, c) > proba(row, best)) best = static_cast<int>(c);
    }
    return best;
}

// Solve (A)beta = b for a small symmetric positive definite system by
// Cholesky; A is overwritten.
std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            if (i == j) {
                a(i, i) = std::sqrt(std::max(s, 1e-12));
            } else {
                a(i, j) = s / a(j, j);
            }
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
        b[i] = s / a(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
        b[i] = s / a(i, i);
    }
    return b;
}

}  // namespace

TrainingStats TrainingStats::from(const Matrix& x) {
    TrainingStats stats;
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    stats.mean.assign(d, 0.0);
    stats.sigma.assign(d, 0.0);
    stats.min.assign(d, kInf);
    stats.max.assign(d, -kInf);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x(i, j);
            stats.mean[j] += v;
            stats.min[j] = std::min(stats.min[j], v);
            stats.max[j] = std::max(stats.max[j], v);
        }
        stats.mean[j] /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = x(i, j) - stats.mean[j];
            ss += dv * dv;
        }
        stats.sigma[j] = std::sqrt(ss / static_cast<double>(n));
        if (n == 0) stats.min[j] = stats.max[j] = 0.0;
    }
    return stats;
}

std::vector<std::string> FeatureImportanceVector::ranking() const {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(items[a].weight) > std::abs(items[b].weight);
    });
    std::vector<std::string> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(items[i].feature);
    return out;
}

std::vector<int> FeatureImportanceVector::ranking_signs() const {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(items[a].weight) > std::abs(items[b].weight);
    });
    std::vector<int> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.push_back(items[i].weight < 0.0 ? -1 : 1);
    return out;
}

LimeResult lime_explain(const PredictFn& predict, std::span<const double> x,
                        const std::vector<std::string>& feature_names,
                        const TrainingStats& stats, const LimeConfig& cfg) {
    const std::size_t d = x.size();
    if (feature_names.size() != d || stats.dims() != d) {
        throw Error(Errc::ShapeMismatch, "x, feature names and stats must agree on d");
    }
    LimeResult result;
    result.kernel_width =
        cfg.kernel_width > 0.0 ? cfg.kernel_width : 0.75 * std::sqrt(static_cast<double>(d));

    Rng rng(cfg.seed);
    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    result.perturbations = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            result.perturbations(i, j) = x[j] + stats.sigma[j] * rng.normal();
        }
    }

    // kernel weights on the sigma-scaled displacement
    result.weights.resize(n);
    const double kw2 = result.kernel_width * result.kernel_width;
    for (std::size_t i = 0; i < n; ++i) {
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (stats.sigma[j] == 0.0) continue;
            const double z = (result.perturbations(i, j) - x[j]) / stats.sigma[j];
            dist2 += z * z;
        }
        result.weights[i] = std::exp(-dist2 / kw2);
    }

    Matrix x_query(1, d);
    for (std::size_t j = 0; j < d; ++j) x_query(0, j) = x[j];
    result.target_class = argmax_row(predict(x_query), 0);

    const Matrix proba = predict(result.perturbations);
    std::vector<double> y(n);
    double y_min = kInf, y_max = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = proba(i, result.target_class);
        y_min = std::min(y_min, y[i]);
        y_max = std::max(y_max, y[i]);
    }
    if (y_max - y_min < 1e-15) {
        throw Error(Errc::DegenerateNeighborhood,
                    "black box is constant over the perturbation neighborhood");
    }

    // weighted ridge of y on [1 | standardized z]; intercept unpenalized
    Matrix z(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            z(i, j) = stats.sigma[j] == 0.0
                          ? 0.0
                          : (result.perturbations(i, j) - stats.mean[j]) / stats.sigma[j];
        }
    }
    Matrix a(d + 1, d + 1);
    std::vector<double> b(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = result.weights[i];
        a(0, 0) += w;
        b[0] += w * y[i];
        for (std::size_t p = 0; p < d; ++p) {
            const double zp = z(i, p);
            a(0, p + 1) += w * zp;
            b[p + 1] += w * zp * y[i];
            for (std::size_t q = p; q < d; ++q) {
                a(p + 1, q + 1) += w * zp * z(i, q);
            }
        }
    }
    for (std::size_t p = 0; p < d; ++p) {
        a(p + 1, p + 1) += cfg.ridge_l2;
        for (std::size_t q = 0; q <= p; ++q) {
            a(p + 1, q) = a(q, p + 1);
            if (q >= 1) a(q, p + 1) = a(p + 1, q);
        }
    }
    for (std::size_t p = 0; p <= d; ++p) {
        for (std::size_t q = p + 1; q <= d; ++q) a(q, p) = a(p, q);
    }
    const std::vector<double> beta = solve_spd(std::move(a), std::move(b));

    result.intercept = beta[0];
    result.stats = stats;
    result.importance.method = "lime";
    result.importance.intercept = beta[0];
    for (std::size_t j = 0; j < d; ++j) {
        result.importance.items.push_back({feature_names[j], beta[j + 1]});
    }
    return result;
}

double LimeResult::local_prediction(std::span<const double> row) const {
    double s = intercept;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (stats.sigma[j] == 0.0) continue;
        s += importance.items[j].weight * (row[j] - stats.mean[j]) / stats.sigma[j];
    }
    return s;
}

double lime_fidelity(const LimeResult& result, const PredictFn& predict) {
    const std::size_t n = result.perturbations.rows();
    if (n == 0) throw Error(Errc::EmptySample, "no perturbations stored");
    const Matrix proba = predict(result.perturbations);

    double agree = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool local_is_target = result.local_prediction(result.perturbations.row(i)) >= 0.5;
        const bool bb_is_target = argmax_row(proba, i) == result.target_class;
        total += result.weights[i];
        if (local_is_target == bb_is_target) agree += result.weights[i];
    }
    return total > 0.0 ? agree / total : 0.0;
}

FeatureImportanceVector coefficients_explain(const LinearSurrogate& model, int class_id,
                                             const std::vector<std::string>& feature_names) {
    const auto it = std::find(model.classes.begin(), model.classes.end(), class_id);
    if (it == model.classes.end()) {
        throw Error(Errc::UnknownClass, "class " + std::to_string(class_id));
    }
    const std::size_t row = static_cast<std::size_t>(it - model.classes.begin());
    if (feature_names.size() != model.weights.cols()) {
        throw Error(Errc::ShapeMismatch, "feature names must match model width");
    }
    FeatureImportanceVector out;
    out.method = "coefficients";
    out.intercept = model.bias[row];
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        out.items.push_back({feature_names[j], model.weights(row, j)});
    }
    return out;
}

Bins Bins::quartile_bins(const Matrix& train) {
    Bins bins;
    const std::size_t n = train.rows();
    for (std::size_t j = 0; j < train.cols(); ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = train(i, j);
        std::sort(col.begin(), col.end());
        auto quantile = [&](double q) {
            const double h = (static_cast<double>(n) - 1.0) * q;
            const auto lo = static_cast<std::size_t>(std::floor(h));
            const auto hi = std::min(lo + 1, n - 1);
            return col[lo] + (h - static_cast<double>(lo)) * (col[hi] - col[lo]);
        };
        bins.quartiles.push_back({quantile(0.25), quantile(0.5), quantile(0.75)});
    }
    return bins;
}

int Bins::bin_of(std::size_t feature, double value) const {
    const auto& q = quartiles[feature];
    if (value <= q[0]) return 0;
    if (value <= q[1]) return 1;
    if (value <= q[2]) return 2;
    return 3;
}

bool AnchorRule::matches(std::span<const double> row) const {
    for (const auto& p : predicates) {
        if (!p.matches(row[p.feature])) return false;
    }
    return true;
}

std::string AnchorRule::to_string(const std::vector<std::string>& feature_names) const {
    if (predicates.empty()) return "(always)";
    std::ostringstream os;
    for (std::size_t i = 0; i < predicates.size(); ++i) {
        const auto& p = predicates[i];
        if (i) os << " AND ";
        const std::string& name = p.feature < feature_names.size()
                                      ? feature_names[p.feature]
                                      : "f" + std::to_string(p.feature);
        if (p.lo == -kInf) os << name << " <= " << p.hi;
        else if (p.hi == kInf) os << name << " > " << p.lo;
        else os << p.lo << " < " << name << " <= " << p.hi;
    }
    return os.str();
}

namespace {

AnchorPredicate make_predicate(const Bins& bins, std::size_t feature, int bin) {
    const auto& q = bins.quartiles[feature];
    AnchorPredicate p;
    p.feature = feature;
    p.bin = bin;
    p.lo = bin == 0 ? -kInf : q[bin - 1];
    p.hi = bin == 3 ? kInf : q[bin];
    return p;
}

// Draw each feature from the training marginal; features constrained by the
// rule are drawn from the rows whose value falls in the predicate's bin
// (equivalent to rejection sampling under per-feature independence).
double mc_precision(const AnchorRule& rule, const PredictFn& predict, int x_class,
                    const Matrix& train, int n_mc, Rng rng) {
    const std::size_t d = train.cols();
    const std::size_t n = train.rows();

    std::vector<const AnchorPredicate*> constraint(d, nullptr);
    for (const auto& p : rule.predicates) constraint[p.feature] = &p;

    std::vector<std::vector<double>> pools(d);
    for (std::size_t j = 0; j < d; ++j) {
        if (!constraint[j]) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (constraint[j]->matches(train(i, j))) pools[j].push_back(train(i, j));
        }
        if (pools[j].empty()) {
            // no training value in the bin: clamp to the bin edge nearest x
            pools[j].push_back(constraint[j]->hi == kInf ? constraint[j]->lo
                                                         : constraint[j]->hi);
        }
    }

    Matrix samples(static_cast<std::size_t>(n_mc), d);
    for (int s = 0; s < n_mc; ++s) {
        for (std::size_t j = 0; j < d; ++j) {
            if (constraint[j]) {
                samples(s, j) = pools[j][rng.index(pools[j].size())];
            } else {
                samples(s, j) = train(rng.index(n), j);
            }
        }
    }
    const Matrix proba = predict(samples);
    std::size_t hits = 0;
    for (int s = 0; s < n_mc; ++s) {
        if (argmax_row(proba, static_cast<std::size_t>(s)) == x_class) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_mc);
}

}  // namespace

double anchor_coverage(const AnchorRule& rule, const Matrix& data) {
    if (data.rows() == 0) throw Error(Errc::EmptyData, "coverage over empty data");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (rule.matches(data.row(i))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.rows());
}

double anchor_precision(const AnchorRule& rule, const PredictFn& predict, int x_class,
                        const Matrix& train, int n_mc, std::uint64_t seed) {
    if (train.rows() == 0) throw Error(Errc::EmptyData, "precision over empty data");
    return mc_precision(rule, predict, x_class, train, n_mc, Rng(seed));
}

AnchorRule anchors_explain(const PredictFn& predict, std::span<const double> x,
                           const Matrix& train, const AnchorConfig& cfg) {
    const std::size_t d = train.cols();
    if (x.size() != d) throw Error(Errc::ShapeMismatch, "x must match training width");
    const Bins bins = Bins::quartile_bins(train);

    Matrix x_query(1, d);
    for (std::size_t j = 0; j < d; ++j) x_query(0, j) = x[j];
    const int x_class = argmax_row(predict(x_query), 0);

    Rng base(cfg.seed);
    auto estimate = [&](const AnchorRule& rule) {
        // the stream is derived from the anchored-feature set so estimates do
        // not depend on search order
        std::uint64_t stream = 0x9E3779B9;
        for (const auto& p : rule.predicates) stream = stream * 1099511628211ULL + p.feature + 1;
        return mc_precision(rule, predict, x_class, train, cfg.n_mc, base.fork(stream));
    };

    AnchorRule empty;
    empty.n_samples = cfg.n_mc;
    empty.precision = estimate(empty);
    empty.coverage = 1.0;
    if (empty.precision >= cfg.precision_threshold) return empty;

    struct Candidate {
        AnchorRule rule;
        std::uint64_t mask = 0;
    };
    std::vector<Candidate> beam = {{empty, 0}};
    AnchorRule best = empty;

    for (std::size_t depth = 0; depth < d; ++depth) {
        std::vector<Candidate> expanded;
        std::set<std::uint64_t> seen;
        for (const auto& parent : beam) {
            for (std::size_t j = 0; j < d; ++j) {
                const std::uint64_t bit = 1ULL << j;
                if (parent.mask & bit) continue;
                if (!seen.insert(parent.mask | bit).second) continue;
                Candidate cand;
                cand.mask = parent.mask | bit;
                cand.rule = parent.rule;
                cand.rule.predicates.push_back(make_predicate(bins, j, bins.bin_of(j, x[j])));
                cand.rule.n_samples = cfg.n_mc;
                cand.rule.precision = estimate(cand.rule);
                cand.rule.coverage = anchor_coverage(cand.rule, train);
                expanded.push_back(std::move(cand));
            }
        }
        if (expanded.empty()) break;
        std::stable_sort(expanded.begin(), expanded.end(), [](const Candidate& a, const Candidate& b) {
            return a.rule.precision > b.rule.precision;
        });
        if (expanded.front().rule.precision > best.precision ||
            (best.predicates.empty() && !expanded.front().rule.predicates.empty())) {
            best = expanded.front().rule;
        }
        if (expanded.front().rule.precision >= cfg.precision_threshold) {
            return expanded.front().rule;
        }
        if (expanded.size() > static_cast<std::size_t>(cfg.beam)) {
            expanded.resize(static_cast<std::size_t>(cfg.beam));
        }
        beam = std::move(expanded);
    }

    best.found = false;  // full search exhausted below the threshold
    return best;
}

Counterfactual counterfactual_search(const PredictFn& predict, std::span<const double> x,
                                     int target_class, const TrainingStats& stats,
                                     const CfConfig& cfg, const GradientFn& gradient) {
    const std::size_t d = x.size();
    if (stats.dims() != d) throw Error(Errc::ShapeMismatch, "stats must match x");

    std::vector<double> ranges(d);
    for (std::size_t j = 0; j < d; ++j) ranges[j] = stats.max[j] - stats.min[j];

    auto proba_of = [&](const std::vector<double>& point) {
        Matrix row(1, d);
        for (std::size_t j = 0; j < d; ++j) row(0, j) = point[j];
        return predict(row);
    };
    auto class_of = [&](const std::vector<double>& point) {
        return argmax_row(proba_of(point), 0);
    };
    auto distance = [&](const std::vector<double>& point) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = std::abs(point[j] - x[j]);
            s += ranges[j] > 0.0 ? delta / ranges[j] : delta;
        }
        return s / static_cast<double>(d);
    };

    std::vector<double> current(x.begin(), x.end());
    if (class_of(current) == target_class) {
        throw Error(Errc::ConfigError, "target class must differ from the current class");
    }

    int trace = 0;
    double lambda = cfg.lambda_init;
    bool flipped = false;
    for (int outer = 0; outer < cfg.max_outer && !flipped; ++outer, lambda *= cfg.lambda_growth) {
        auto objective = [&](const std::vector<double>& point) {
            const Matrix p = proba_of(point);
            const double gap = p(0, target_class) - 1.0;
            return lambda * gap * gap + distance(point);
        };

        if (gradient) {
            // gradient descent on the smooth part + subgradient of the distance
            for (int it = 0; it < cfg.max_inner; ++it) {
                const Matrix p = proba_of(current);
                const double gap = p(0, target_class) - 1.0;
                const std::vector<double> g = gradient(current, target_class);
                bool moved = false;
                std::vector<double> next = current;
                for (std::size_t j = 0; j < d; ++j) {
                    const double range = ranges[j] > 0.0 ? ranges[j] : 1.0;
                    double grad_j = 2.0 * lambda * gap * g[j];
                    const double delta = current[j] - x[j];
                    if (delta != 0.0) {
                        grad_j += (delta > 0.0 ? 1.0 : -1.0) / (static_cast<double>(d) * range);
                    }
                    next[j] = current[j] - cfg.step * range * grad_j;
                    if (next[j] != current[j]) moved = true;
                }
                if (!moved) break;
                current = std::move(next);
                ++trace;
                if (class_of(current) == target_class) {
                    flipped = true;
                    break;
                }
            }
        } else {
            // coordinate-wise line search over doubling steps
            for (int pass = 0; pass < cfg.max_inner && !flipped; ++pass) {
                bool improved = false;
                double best_obj = objective(current);
                for (std::size_t j = 0; j < d; ++j) {
                    const double range = ranges[j] > 0.0 ? ranges[j] : 1.0;
                    double best_value = current[j];
                    for (double scale : {1.0, 2.0, 4.0, 8.0, 16.0}) {
                        for (double sign : {1.0, -1.0}) {
                            std::vector<double> trial = current;
                            trial[j] = current[j] + sign * scale * cfg.step * range;
                            const double obj = objective(trial);
                            if (obj < best_obj - 1e-15) {
                                best_obj = obj;
                                best_value = trial[j];
                            }
                        }
                    }
                    if (best_value != current[j]) {
                        current[j] = best_value;
                        improved = true;
                        ++trace;
                    }
                }
                if (class_of(current) == target_class) flipped = true;
                if (!improved) break;
            }
        }
        if (!flipped && class_of(current) == target_class) flipped = true;
    }

    if (!flipped) {
        throw Error(Errc::NoCounterfactualFound,
                    "lambda escalation exhausted after " + std::to_string(cfg.max_outer) +
                        " rounds");
    }

    // greedy sparsity pass: revert changed features (smallest normalized
    // change first) whenever the class stays on target
    bool reverted = true;
    while (reverted) {
        reverted = false;
        std::vector<std::pair<double, std::size_t>> changed;
        for (std::size_t j = 0; j < d; ++j) {
            if (current[j] != x[j]) {
                const double range = ranges[j] > 0.0 ? ranges[j] : 1.0;
                changed.emplace_back(std::abs(current[j] - x[j]) / range, j);
            }
        }
        std::sort(changed.begin(), changed.end());
        for (const auto& [delta, j] : changed) {
            std::vector<double> trial = current;
            trial[j] = x[j];
            if (class_of(trial) == target_class) {
                current = std::move(trial);
                reverted = true;
                break;
            }
        }
    }

    Counterfactual out;
    out.original.assign(x.begin(), x.end());
    out.cf = current;
    out.target_class = target_class;
    const ProximityResult prox = cf_proximity(x, current, stats);
    out.proximity = prox.value;
    out.unscaled_features = prox.unscaled;
    out.sparsity = cf_sparsity(x, current);
    out.trace_length = trace;
    return out;
}

ProximityResult cf_proximity(std::span<const double> x, std::span<const double> xp,
                             const TrainingStats& stats) {
    if (x.size() != xp.size() || stats.dims() != x.size()) {
        throw Error(Errc::DimensionMismatch, "proximity inputs must share a dimension");
    }
    ProximityResult result;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double delta = std::abs(x[j] - xp[j]);
        const double range = stats.max[j] - stats.min[j];
        if (range > 0.0) {
            result.value += delta / range;
        } else {
            result.value += delta;  // flagged: measured unscaled
            if (delta > 0.0) result.unscaled.push_back(j);
        }
    }
    result.value /= static_cast<double>(x.size());
    return result;
}

int cf_sparsity(std::span<const double> x, std::span<const double> xp) {
    if (x.size() != xp.size()) {
        throw Error(Errc::DimensionMismatch, "sparsity inputs must share a dimension");
    }
    int count = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (std::abs(x[j] - xp[j]) > 1e-12) ++count;
    }
    return count;
}

std::string importance_plot_csv(const FeatureImportanceVector& fiv) {
    std::ostringstream os;
    os << "feature,weight\n";
    std::vector<std::size_t> order(fiv.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(fiv.items[a].weight) > std::abs(fiv.items[b].weight);
    });
    for (std::size_t i : order) {
        os << csv::escape_field(fiv.items[i].feature) << ','
           << csv::format_double(fiv.items[i].weight) << '\n';
    }
    return os.str();
}

PredictFn surrogate_predict_fn(const LinearSurrogate& model) {
    return [model](const Matrix& x) { return predict_proba(model, x); };
}

GradientFn surrogate_gradient_fn(const LinearSurrogate& model) {
    // d p_t / d x_j = p_t * (w_tj - sum_c p_c w_cj)
    return [model](std::span<const double> x, int target_class) {
        Matrix row(1, x.size());
        for (std::size_t j = 0; j < x.size(); ++j) row(0, j) = x[j];
        const Matrix proba = predict_proba(model, row);
        const std::size_t t = static_cast<std::size_t>(target_class);
        std::vector<double> grad(x.size(), 0.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            double avg = 0.0;
            for (std::size_t c = 0; c < proba.cols(); ++c) {
                avg += proba(0, c) * model.weights(c, j);
            }
            grad[j] = proba(0, t) * (model.weights(t, j) - avg);
        }
        return grad;
    };
}

}  // namespace xclus
