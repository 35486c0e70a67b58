#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "senti/corpus.hpp"
#include "senti/error.hpp"
#include "senti/rng.hpp"
#include "senti/sparse.hpp"

namespace senti {

struct TrainConfig {
    double c_value = 1.0;        // inverse regularization strength
    double alpha = 1.0;          // NB smoothing
    std::size_t max_epochs = 1600;
    double learning_rate = 0.0;  // <= 0: automatic backtracking step search
    double tolerance = 1e-4;     // logistic stop: sup-norm of the gradient
    std::uint64_t seed = 42;
};

struct Prediction {
    Label label = Label::Negative;
    std::array<double, 3> scores{};
};

// Argmax with ties broken by the lowest class index.
inline Label argmax_label(const std::array<double, 3>& scores) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
    return static_cast<Label>(best);
}

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes
// ---------------------------------------------------------------------------

// Log priors are empirical class frequencies (a class absent from training
// keeps probability zero, i.e. -inf log prior). Per-class likelihoods use
// Lidstone smoothing over whatever weights the vectors carry, so the same
// trainer serves raw counts and fractional TF-IDF counts.
struct NaiveBayesModel {
    std::array<double, 3> class_log_prior{};
    std::vector<double> feature_log_prob;  // 3 x dim, row-major
    std::uint32_t dim = 0;
    double alpha = 1.0;

    double log_prob(int cls, std::uint32_t term) const {
        return feature_log_prob[static_cast<std::size_t>(cls) * dim + term];
    }
};

inline NaiveBayesModel train_nb(std::span<const SparseVector> X, std::span<const Label> y,
                                double alpha = 1.0) {
    if (X.empty()) throw EmptyTrainingSet("train_nb: no documents");
    if (X.size() != y.size())
        throw LengthMismatch("train_nb: |X| != |y|");
    const std::uint32_t dim = X.front().dim;
    for (const auto& x : X)
        if (x.dim != dim) throw DimensionMismatch("train_nb: inconsistent vector dimensions");

    NaiveBayesModel model;
    model.dim = dim;
    model.alpha = alpha;
    model.feature_log_prob.assign(3 * static_cast<std::size_t>(dim), 0.0);

    std::array<double, 3> class_count{};
    std::vector<double> term_weight(3 * static_cast<std::size_t>(dim), 0.0);
    std::array<double, 3> total_weight{};
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto c = static_cast<std::size_t>(index_of(y[i]));
        class_count[c] += 1.0;
        for (const auto& e : X[i].entries) {
            term_weight[c * dim + e.index] += e.weight;
            total_weight[c] += e.weight;
        }
    }

    const auto n = static_cast<double>(X.size());
    for (int c = 0; c < kNumClasses; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        model.class_log_prior[uc] = class_count[uc] > 0.0
                                        ? std::log(class_count[uc] / n)
                                        : -std::numeric_limits<double>::infinity();
        const double denom = total_weight[uc] + alpha * static_cast<double>(dim);
        for (std::uint32_t t = 0; t < dim; ++t)
            model.feature_log_prob[uc * dim + t] =
                std::log((term_weight[uc * dim + t] + alpha) / denom);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Linear models (softmax logistic regression, one-vs-rest linear SVM)
// ---------------------------------------------------------------------------

struct LinearModel {
    enum class Kind { Logistic, Svm };

    std::vector<double> weights;  // 3 x dim, row-major
    std::array<double, 3> bias{};
    Kind kind = Kind::Logistic;
    double c_value = 1.0;
    std::uint32_t dim = 0;
    double final_objective = 0.0;

    std::span<const double> row(int cls) const {
        return {weights.data() + static_cast<std::size_t>(cls) * dim, dim};
    }
};

inline const char* to_string(LinearModel::Kind k) {
    return k == LinearModel::Kind::Logistic ? "logreg" : "svm";
}

namespace detail {

inline void check_xy(std::span<const SparseVector> X, std::span<const Label> y,
                     const char* who) {
    if (X.empty()) throw EmptyTrainingSet(std::string(who) + ": no documents");
    if (X.size() != y.size()) throw LengthMismatch(std::string(who) + ": |X| != |y|");
    const std::uint32_t dim = X.front().dim;
    for (const auto& x : X)
        if (x.dim != dim) throw DimensionMismatch(std::string(who) + ": inconsistent dimensions");
}

inline std::array<double, 3> class_scores(const std::vector<double>& w,
                                          const std::array<double, 3>& b, std::uint32_t dim,
                                          const SparseVector& x) {
    std::array<double, 3> z = b;
    for (const auto& e : x.entries) {
        const std::size_t idx = e.index;
        z[0] += w[idx] * e.weight;
        z[1] += w[dim + idx] * e.weight;
        z[2] += w[2 * static_cast<std::size_t>(dim) + idx] * e.weight;
    }
    return z;
}

inline std::array<double, 3> softmax(std::array<double, 3> z) {
    const double m = std::max({z[0], z[1], z[2]});
    double sum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (auto& v : z) v /= sum;
    return z;
}

}  // namespace detail

// Softmax cross-entropy objective J(W,b) = C * sum_i CE_i + 0.5*||W||^2 with
// an unregularized bias. Exposed so tests can difference it numerically.
inline double logreg_objective(std::span<const SparseVector> X, std::span<const Label> y,
                               const std::vector<double>& w, const std::array<double, 3>& b,
                               std::uint32_t dim, double c_value) {
    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto z = detail::class_scores(w, b, dim, X[i]);
        const double m = std::max({z[0], z[1], z[2]});
        const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m) +
                                        std::exp(z[2] - m));
        loss += lse - z[static_cast<std::size_t>(index_of(y[i]))];
    }
    double reg = 0.0;
    for (const double v : w) reg += v * v;
    return c_value * loss + 0.5 * reg;
}

// Analytic gradient of logreg_objective; dense output (3*dim weights then 3 biases).
inline void logreg_gradient(std::span<const SparseVector> X, std::span<const Label> y,
                            const std::vector<double>& w, const std::array<double, 3>& b,
                            std::uint32_t dim, double c_value, std::vector<double>& grad_w,
                            std::array<double, 3>& grad_b) {
    grad_w.assign(w.size(), 0.0);
    grad_b = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < X.size(); ++i) {
        const auto p = detail::softmax(detail::class_scores(w, b, dim, X[i]));
        const auto target = static_cast<std::size_t>(index_of(y[i]));
        for (std::size_t c = 0; c < 3; ++c) {
            const double coeff = c_value * (p[c] - (c == target ? 1.0 : 0.0));
            if (coeff == 0.0) continue;
            for (const auto& e : X[i].entries)
                grad_w[c * dim + e.index] += coeff * e.weight;
            grad_b[c] += coeff;
        }
    }
    for (std::size_t j = 0; j < w.size(); ++j) grad_w[j] += w[j];
}

// Deterministic full-batch gradient descent from zero initialization, run
// until the gradient sup-norm drops below config.tolerance or max_epochs is
// reached. With learning_rate <= 0 each epoch backtracks from the last
// accepted step (Armijo condition), which removes the need for tuning; an
// explicit positive learning_rate is used as-is and may diverge, which
// surfaces as NonFinite.
inline LinearModel train_logreg(std::span<const SparseVector> X, std::span<const Label> y,
                                const TrainConfig& config = {},
                                std::vector<double>* objective_trace = nullptr) {
    detail::check_xy(X, y, "train_logreg");
    const std::uint32_t dim = X.front().dim;

    LinearModel model;
    model.kind = LinearModel::Kind::Logistic;
    model.c_value = config.c_value;
    model.dim = dim;
    model.weights.assign(3 * static_cast<std::size_t>(dim), 0.0);

    std::vector<double> grad_w;
    std::array<double, 3> grad_b{};
    std::vector<double> trial_w(model.weights.size());
    std::array<double, 3> trial_b{};

    double objective =
        logreg_objective(X, y, model.weights, model.bias, dim, config.c_value);
    if (objective_trace) objective_trace->push_back(objective);
    const bool auto_step = config.learning_rate <= 0.0;
    double step = auto_step ? 1.0 : config.learning_rate;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        logreg_gradient(X, y, model.weights, model.bias, dim, config.c_value, grad_w, grad_b);
        double sup = 0.0;
        double sq = 0.0;
        for (const double g : grad_w) {
            sup = std::max(sup, std::abs(g));
            sq += g * g;
        }
        for (const double g : grad_b) {
            sup = std::max(sup, std::abs(g));
            sq += g * g;
        }
        if (!std::isfinite(sup)) throw NonFinite("train_logreg: gradient is not finite");
        if (sup < config.tolerance) break;

        if (auto_step) {
            step = std::min(step * 2.0, 1.0);  // allow recovery after cautious epochs
            for (;;) {
                for (std::size_t j = 0; j < trial_w.size(); ++j)
                    trial_w[j] = model.weights[j] - step * grad_w[j];
                for (std::size_t c = 0; c < 3; ++c) trial_b[c] = model.bias[c] - step * grad_b[c];
                const double trial =
                    logreg_objective(X, y, trial_w, trial_b, dim, config.c_value);
                if (std::isfinite(trial) && trial <= objective - 1e-4 * step * sq) {
                    model.weights.swap(trial_w);
                    model.bias = trial_b;
                    objective = trial;
                    break;
                }
                step *= 0.5;
                if (step < 1e-18) throw NonFinite("train_logreg: step search collapsed");
            }
        } else {
            for (std::size_t j = 0; j < model.weights.size(); ++j)
                model.weights[j] -= step * grad_w[j];
            for (std::size_t c = 0; c < 3; ++c) model.bias[c] -= step * grad_b[c];
            objective = logreg_objective(X, y, model.weights, model.bias, dim, config.c_value);
            if (!std::isfinite(objective))
                throw NonFinite("train_logreg: objective became NaN/Inf (learning rate too high)");
        }
        if (objective_trace) objective_trace->push_back(objective);
    }
    model.final_objective = objective;
    return model;
}

// One-vs-rest hinge objective for one class: 0.5*||w||^2 + C * sum_i hinge_i.
inline double svm_objective(std::span<const SparseVector> X, std::span<const signed char> y_pm,
                            std::span<const double> w, double b, double c_value) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double margin = static_cast<double>(y_pm[i]) * (dot(X[i], w) + b);
        hinge += std::max(0.0, 1.0 - margin);
    }
    double sq = 0.0;
    for (const double v : w) sq += v * v;
    return 0.5 * sq + c_value * hinge;
}

inline double svm_total_hinge(std::span<const SparseVector> X, std::span<const signed char> y_pm,
                              std::span<const double> w, double b) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double margin = static_cast<double>(y_pm[i]) * (dot(X[i], w) + b);
        hinge += std::max(0.0, 1.0 - margin);
    }
    return hinge;
}

// One-vs-rest linear SVM trained in the primal with per-example subgradient
// steps on the decaying schedule eta_t = 1/(lambda*t), lambda = 1/(n*C).
// Epoch order is reshuffled from a seed-fixed generator. The returned weights
// per class are the best iterate seen at any epoch boundary, so the reported
// per-epoch objective series is non-increasing.
inline LinearModel train_svm(std::span<const SparseVector> X, std::span<const Label> y,
                             const TrainConfig& config = {},
                             std::vector<double>* objective_trace = nullptr) {
    detail::check_xy(X, y, "train_svm");
    const std::uint32_t dim = X.front().dim;
    const std::size_t n = X.size();
    const double lambda = 1.0 / (static_cast<double>(n) * config.c_value);

    LinearModel model;
    model.kind = LinearModel::Kind::Svm;
    model.c_value = config.c_value;
    model.dim = dim;
    model.weights.assign(3 * static_cast<std::size_t>(dim), 0.0);

    std::vector<double> total_best(config.max_epochs, 0.0);
    std::vector<signed char> y_pm(n);
    std::vector<double> v(dim);       // w = scale * v
    std::vector<double> w_best(dim);
    std::vector<std::size_t> order(n);

    for (int cls = 0; cls < kNumClasses; ++cls) {
        for (std::size_t i = 0; i < n; ++i)
            y_pm[i] = index_of(y[i]) == cls ? 1 : -1;

        std::fill(v.begin(), v.end(), 0.0);
        double scale = 1.0;
        double b = 0.0;
        std::fill(w_best.begin(), w_best.end(), 0.0);
        double b_best = 0.0;
        double best_objective = svm_objective(X, y_pm, w_best, b_best, config.c_value);

        std::mt19937_64 rng(config.seed);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t t = 0;

        for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
            deterministic_shuffle(order, rng);
            for (const std::size_t i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double margin =
                    static_cast<double>(y_pm[i]) * (scale * dot(X[i], v) + b);
                const double shrink = 1.0 - eta * lambda;
                if (shrink <= 0.0) {
                    std::fill(v.begin(), v.end(), 0.0);
                    scale = 1.0;
                } else {
                    scale *= shrink;
                    if (scale < 1e-9) {  // fold the scale in before it underflows
                        for (auto& vj : v) vj *= scale;
                        scale = 1.0;
                    }
                }
                if (margin < 1.0) {
                    const double coef = eta * static_cast<double>(y_pm[i]) / scale;
                    for (const auto& e : X[i].entries) v[e.index] += coef * e.weight;
                    b += eta * static_cast<double>(y_pm[i]);
                }
            }
            // Keep the best epoch-boundary iterate per class.
            std::vector<double> w_now(dim);
            for (std::uint32_t j = 0; j < dim; ++j) w_now[j] = scale * v[j];
            const double objective = svm_objective(X, y_pm, w_now, b, config.c_value);
            if (objective < best_objective) {
                best_objective = objective;
                w_best.swap(w_now);
                b_best = b;
            }
            total_best[epoch] += best_objective;
        }

        std::copy(w_best.begin(), w_best.end(),
                  model.weights.begin() + static_cast<std::size_t>(cls) * dim);
        model.bias[static_cast<std::size_t>(cls)] = b_best;
        model.final_objective += best_objective;
    }
    if (objective_trace)
        objective_trace->assign(total_best.begin(), total_best.end());
    return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

// NB scores are log-posteriors (normalized with log-sum-exp), logistic scores
// are softmax probabilities, SVM scores are raw margins.
inline Prediction predict(const NaiveBayesModel& model, const SparseVector& x) {
    if (x.dim != model.dim) throw DimensionMismatch("predict: vector dim != model dim");
    std::array<double, 3> joint{};
    for (int c = 0; c < kNumClasses; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        double acc = model.class_log_prior[uc];
        for (const auto& e : x.entries) acc += e.weight * model.log_prob(c, e.index);
        joint[uc] = acc;
    }
    const double m = std::max({joint[0], joint[1], joint[2]});
    double sum = 0.0;
    for (const double v : joint) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    Prediction pred;
    for (std::size_t c = 0; c < 3; ++c) pred.scores[c] = joint[c] - lse;
    pred.label = argmax_label(pred.scores);
    return pred;
}

inline Prediction predict(const LinearModel& model, const SparseVector& x) {
    if (x.dim != model.dim) throw DimensionMismatch("predict: vector dim != model dim");
    auto z = detail::class_scores(model.weights, model.bias, model.dim, x);
    Prediction pred;
    pred.scores = model.kind == LinearModel::Kind::Logistic ? detail::softmax(z) : z;
    pred.label = argmax_label(pred.scores);
    return pred;
}

using ClassifierModel = std::variant<NaiveBayesModel, LinearModel>;

inline Prediction predict(const ClassifierModel& model, const SparseVector& x) {
    return std::visit([&](const auto& m) { return predict(m, x); }, model);
}

inline const char* model_kind_name(const ClassifierModel& model) {
    if (std::holds_alternative<NaiveBayesModel>(model)) return "nb";
    return to_string(std::get<LinearModel>(model).kind);
}

}  // namespace senti
