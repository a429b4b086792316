#include "xclus/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xclus/errors.hpp"
#include "xclus/rng.hpp"

namespace xclus {

namespace {

void softmax_rows(Matrix& logits) {
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        double mx = logits(i, 0);
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            logits(i, j) = std::exp(logits(i, j) - mx);
            sum += logits(i, j);
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) logits(i, j) /= sum;
    }
}

Matrix logits_of(const Matrix& x, const Matrix& w, const std::vector<double>& b) {
    Matrix out(x.rows(), w.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < w.rows(); ++c) {
            double s = b[c];
            for (std::size_t j = 0; j < x.cols(); ++j) s += w(c, j) * x(i, j);
            out(i, c) = s;
        }
    }
    return out;
}

}  // namespace

double loss_and_gradient(const Matrix& x, const std::vector<std::size_t>& class_index,
                         std::size_t n_classes, const Matrix& weights,
                         const std::vector<double>& bias, double l2, Matrix* grad_w,
                         std::vector<double>* grad_b) {
    const std::size_t n = x.rows();
    Matrix proba = logits_of(x, weights, bias);
    softmax_rows(proba);

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loss -= std::log(std::max(proba(i, class_index[i]), 1e-300));
    }
    loss /= static_cast<double>(n);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            loss += 0.5 * l2 * weights(c, j) * weights(c, j);
        }
    }

    if (grad_w) {
        *grad_w = Matrix(n_classes, x.cols());
        grad_b->assign(n_classes, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < n_classes; ++c) {
                const double delta = proba(i, c) - (class_index[i] == c ? 1.0 : 0.0);
                (*grad_b)[c] += delta;
                for (std::size_t j = 0; j < x.cols(); ++j) {
                    (*grad_w)(c, j) += delta * x(i, j);
                }
            }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < n_classes; ++c) {
            (*grad_b)[c] *= inv_n;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                (*grad_w)(c, j) = (*grad_w)(c, j) * inv_n + l2 * weights(c, j);
            }
        }
    }
    return loss;
}

LinearSurrogate train_linear(const Matrix& x, const std::vector<int>& labels,
                             const SurrogateConfig& cfg) {
    if (labels.size() != x.rows()) {
        throw Error(Errc::RowMismatch, "labels must align with rows");
    }
    std::set<int> class_set(labels.begin(), labels.end());
    if (class_set.size() < 2) throw Error(Errc::SingleClass, "training needs >= 2 classes");

    LinearSurrogate model;
    model.classes.assign(class_set.begin(), class_set.end());
    model.seed = cfg.seed;
    const std::size_t k = model.classes.size();
    const std::size_t d = x.cols();

    std::vector<std::size_t> class_index(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        class_index[i] = static_cast<std::size_t>(
            std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) -
            model.classes.begin());
    }

    Rng rng(cfg.seed);
    model.weights = Matrix(k, d);
    model.bias.assign(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) model.weights(c, j) = 0.01 * rng.normal();
    }

    Matrix grad_w;
    std::vector<double> grad_b;
    double lr = cfg.lr;
    double loss = loss_and_gradient(x, class_index, k, model.weights, model.bias, cfg.l2,
                                    &grad_w, &grad_b);
    int epoch = 0;
    for (; epoch < cfg.epochs; ++epoch) {
        // step with halving safeguard: never accept an increase
        Matrix w_next;
        std::vector<double> b_next;
        double next_loss = loss;
        bool accepted = false;
        while (lr > 1e-12) {
            w_next = model.weights;
            b_next = model.bias;
            for (std::size_t c = 0; c < k; ++c) {
                b_next[c] -= lr * grad_b[c];
                for (std::size_t j = 0; j < d; ++j) w_next(c, j) -= lr * grad_w(c, j);
            }
            next_loss = loss_and_gradient(x, class_index, k, w_next, b_next, cfg.l2, nullptr,
                                          nullptr);
            if (next_loss <= loss) {
                accepted = true;
                break;
            }
            lr *= 0.5;
        }
        if (!accepted) break;
        model.weights = std::move(w_next);
        model.bias = std::move(b_next);
        const double delta = loss - next_loss;
        loss = next_loss;
        loss_and_gradient(x, class_index, k, model.weights, model.bias, cfg.l2, &grad_w, &grad_b);
        if (delta < cfg.tol) {
            ++epoch;
            break;
        }
    }
    model.epochs_run = epoch;
    model.final_loss = loss;
    return model;
}

Matrix predict_proba(const LinearSurrogate& model, const Matrix& x) {
    if (x.cols() != model.weights.cols()) {
        throw Error(Errc::ShapeMismatch, "expected " + std::to_string(model.weights.cols()) +
                                             " features, got " + std::to_string(x.cols()));
    }
    Matrix proba = logits_of(x, model.weights, model.bias);
    softmax_rows(proba);
    return proba;
}

std::vector<int> predict(const LinearSurrogate& model, const Matrix& x) {
    const Matrix proba = predict_proba(model, x);
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < proba.cols(); ++c) {
            if (proba(i, c) > proba(i, best)) best = c;
        }
        out[i] = model.classes[best];
    }
    return out;
}

EvalResult evaluate(const LinearSurrogate& model, const Matrix& x, const std::vector<int>& y) {
    if (y.size() != x.rows()) throw Error(Errc::RowMismatch, "y must align with rows");
    const std::vector<int> predictions = predict(model, x);

    EvalResult result;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += (predictions[i] == y[i]);
    result.accuracy = static_cast<double>(correct) / static_cast<double>(y.size());

    double f1_sum = 0.0;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
        const int cls = model.classes[c];
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (predictions[i] == cls && y[i] == cls) ++tp;
            else if (predictions[i] == cls) ++fp;
            else if (y[i] == cls) ++fn;
        }
        double f1 = 0.0;
        if (tp + fp + fn == 0) {
            result.absent_classes.push_back(cls);
        } else if (2 * tp + fp + fn > 0) {
            f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
        }
        result.per_class_f1.push_back(f1);
        f1_sum += f1;
    }
    result.macro_f1 = f1_sum / static_cast<double>(model.classes.size());
    return result;
}

}  // namespace xclus
