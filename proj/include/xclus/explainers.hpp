#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xclus/matrix.hpp"
#include "xclus/surrogate.hpp"

namespace xclus {

// Black box: batch of rows in, class-probability rows out.
using PredictFn = std::function<Matrix(const Matrix&)>;
// Optional gradient of the target-class probability w.r.t. the input.
using GradientFn = std::function<std::vector<double>(std::span<const double>, int)>;

// Per-feature location/scale/range of the space the black box works in.
struct TrainingStats {
    std::vector<double> mean;
    std::vector<double> sigma;  // population sigma
    std::vector<double> min;
    std::vector<double> max;

    static TrainingStats from(const Matrix& x);
    std::size_t dims() const { return mean.size(); }
};

struct FeatureImportance {
    std::string feature;
    double weight = 0.0;

    bool operator==(const FeatureImportance&) const = default;
};

struct FeatureImportanceVector {
    std::vector<FeatureImportance> items;  // original feature order
    std::string method;
    std::string instance_id;
    double intercept = 0.0;

    // feature names ordered by |weight| descending (ties by feature order)
    std::vector<std::string> ranking() const;
    std::vector<int> ranking_signs() const;  // signs in ranking order, +1/-1

    bool operator==(const FeatureImportanceVector&) const = default;
};

struct LimeConfig {
    int n_samples = 5000;
    double kernel_width = 0.0;  // 0 -> 0.75 * sqrt(d)
    double ridge_l2 = 1.0;
    std::uint64_t seed = 0;
};

struct LimeResult {
    FeatureImportanceVector importance;
    int target_class = 0;        // class index explained (argmax at x)
    Matrix perturbations;        // the sampled neighborhood
    std::vector<double> weights; // kernel weights, parallel to perturbations
    double intercept = 0.0;      // local model intercept (standardized space)
    double kernel_width = 0.0;
    TrainingStats stats;         // standardization used by the local model

    // local model output (estimate of the target-class probability)
    double local_prediction(std::span<const double> row) const;
};

// Weighted ridge fit of the target-class probability on a gaussian
// neighborhood of x, standardized by the training stats. Coefficients come
// back signed, in original feature order.
LimeResult lime_explain(const PredictFn& predict, std::span<const double> x,
                        const std::vector<std::string>& feature_names,
                        const TrainingStats& stats, const LimeConfig& cfg);

// Kernel-weighted agreement rate between the local model's predicted class
// and the black box over the stored perturbation set.
double lime_fidelity(const LimeResult& result, const PredictFn& predict);

// Global white-box explanation: the surrogate's weight row for the class,
// identical for every instance.
FeatureImportanceVector coefficients_explain(const LinearSurrogate& model, int class_id,
                                             const std::vector<std::string>& feature_names);

// Adapters turning a surrogate into the black-box interfaces above.
PredictFn surrogate_predict_fn(const LinearSurrogate& model);
GradientFn surrogate_gradient_fn(const LinearSurrogate& model);

struct Bins {
    // per feature: the three quartile boundaries; bins are
    // (-inf,q1], (q1,q2], (q2,q3], (q3,+inf)
    std::vector<std::array<double, 3>> quartiles;

    static Bins quartile_bins(const Matrix& train);
    int bin_of(std::size_t feature, double value) const;
};

struct AnchorPredicate {
    std::size_t feature = 0;
    int bin = 0;
    double lo = 0.0;  // -inf encoded as -HUGE_VAL
    double hi = 0.0;

    bool matches(double value) const { return value > lo && value <= hi; }
};

struct AnchorRule {
    std::vector<AnchorPredicate> predicates;
    double precision = 0.0;
    double coverage = 0.0;
    int n_samples = 0;
    bool found = true;  // false: full conjunction still below the threshold

    bool matches(std::span<const double> row) const;
    std::string to_string(const std::vector<std::string>& feature_names) const;
};

struct AnchorConfig {
    double precision_threshold = 0.95;
    int n_mc = 10000;
    int beam = 4;
    std::uint64_t seed = 0;
};

// Greedy beam search over quartile-bin predicates, precision estimated by
// Monte Carlo over the training marginals conditioned on the rule.
AnchorRule anchors_explain(const PredictFn& predict, std::span<const double> x,
                           const Matrix& train, const AnchorConfig& cfg);

double anchor_coverage(const AnchorRule& rule, const Matrix& data);
double anchor_precision(const AnchorRule& rule, const PredictFn& predict, int x_class,
                        const Matrix& train, int n_mc, std::uint64_t seed);

struct CfConfig {
    double lambda_init = 0.1;
    double lambda_growth = 2.0;
    int max_outer = 25;
    double step = 0.05;          // in units of the feature range
    int max_inner = 100;
    std::uint64_t seed = 0;
};

struct Counterfactual {
    std::vector<double> original;
    std::vector<double> cf;
    int target_class = 0;
    double proximity = 0.0;
    int sparsity = 0;
    int trace_length = 0;                     // accepted optimizer moves
    std::vector<std::size_t> unscaled_features;  // zero-range features changed
};

// Wachter-style search: minimize lambda*(p_target - 1)^2 + d(x, x') with d
// the range-normalized mean absolute change; lambda grows geometrically until
// the class flips, then a greedy pass reverts changes that are not needed.
Counterfactual counterfactual_search(const PredictFn& predict, std::span<const double> x,
                                     int target_class, const TrainingStats& stats,
                                     const CfConfig& cfg,
                                     const GradientFn& gradient = nullptr);

struct ProximityResult {
    double value = 0.0;
    std::vector<std::size_t> unscaled;  // features measured unscaled (zero range)
};

ProximityResult cf_proximity(std::span<const double> x, std::span<const double> xp,
                             const TrainingStats& stats);
int cf_sparsity(std::span<const double> x, std::span<const double> xp);

// CSV emitter for bar-chart tooling: feature,weight rows in ranking order.
std::string importance_plot_csv(const FeatureImportanceVector& fiv);

}  // namespace xclus
