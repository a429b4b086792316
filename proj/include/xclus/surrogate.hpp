#pragma once

#include <cstdint>
#include <vector>

#include "xclus/matrix.hpp"

namespace xclus {

struct SurrogateConfig {
    double l2 = 1e-4;
    double lr = 0.1;
    int epochs = 2000;
    double tol = 1e-9;  // early stop when the loss delta drops below this
    std::uint64_t seed = 0;
};

// Multinomial logistic regression trained with full-batch gradient descent.
// Plays the paper pipeline's white-box role: its weight rows are the global
// Coefficients explanation and its probabilities feed LIME, Anchors and the
// counterfactual search.
struct LinearSurrogate {
    Matrix weights;              // k x d
    std::vector<double> bias;    // k
    std::vector<int> classes;    // original labels, ascending
    int epochs_run = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const LinearSurrogate&) const = default;
};

LinearSurrogate train_linear(const Matrix& x, const std::vector<int>& labels,
                             const SurrogateConfig& cfg = {});

Matrix predict_proba(const LinearSurrogate& model, const Matrix& x);
std::vector<int> predict(const LinearSurrogate& model, const Matrix& x);

struct EvalResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    std::vector<int> absent_classes;  // classes missing from both y and predictions (F1 = 0)
};

EvalResult evaluate(const LinearSurrogate& model, const Matrix& x, const std::vector<int>& y);

// Mean cross-entropy + (l2/2)*||W||^2 and its gradient; exposed so the
// finite-difference check can drive it directly.
double loss_and_gradient(const Matrix& x, const std::vector<std::size_t>& class_index,
                         std::size_t n_classes, const Matrix& weights,
                         const std::vector<double>& bias, double l2, Matrix* grad_w,
                         std::vector<double>* grad_b);

}  // namespace xclus
