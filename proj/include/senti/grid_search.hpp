#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "senti/error.hpp"
#include "senti/eval.hpp"
#include "senti/models.hpp"
#include "senti/rng.hpp"

namespace senti {

inline constexpr std::array<double, 3> kDefaultGrid = {0.1, 1.0, 10.0};

// Stratified fold assignment: per class, a seeded shuffle then round-robin
// dealing, so every fold's class mix tracks the overall mix. Throws
// TooFewSamples when a class present overall cannot reach every fold.
inline std::vector<std::size_t> stratified_fold_assignment(std::span<const Label> y,
                                                           std::size_t k, std::uint64_t seed) {
    if (k < 2) throw TooFewSamples("cross-validation needs k >= 2");
    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < y.size(); ++i)
        by_class[static_cast<std::size_t>(index_of(y[i]))].push_back(i);
    for (const auto& group : by_class)
        if (!group.empty() && group.size() < k)
            throw TooFewSamples("a class has fewer samples than folds");

    std::vector<std::size_t> fold_of(y.size());
    std::mt19937_64 rng(seed);
    for (auto& group : by_class) {
        deterministic_shuffle(group, rng);
        for (std::size_t j = 0; j < group.size(); ++j) fold_of[group[j]] = j % k;
    }
    return fold_of;
}

using LinearTrainer = LinearModel (*)(std::span<const SparseVector>, std::span<const Label>,
                                      const TrainConfig&, std::vector<double>*);

struct GridPoint {
    double c_value = 0.0;
    double mean_score = 0.0;  // weighted F1 averaged over folds
    double std_score = 0.0;
    std::vector<double> fold_scores;
};

struct GridSearchResult {
    double best_c = 0.0;
    std::vector<GridPoint> table;
};

// k-fold stratified cross-validation over the C grid; score is weighted F1.
// Best C is the argmax of the mean score, ties broken by the smaller C.
inline GridSearchResult grid_search(LinearModel::Kind kind, std::span<const SparseVector> X,
                                    std::span<const Label> y, std::span<const double> grid,
                                    std::size_t k, std::uint64_t seed,
                                    const TrainConfig& base_config = {}) {
    if (grid.empty()) throw Error("grid_search: empty grid");
    if (X.size() != y.size()) throw LengthMismatch("grid_search: |X| != |y|");
    if (X.empty()) throw EmptyTrainingSet("grid_search: no documents");

    const LinearTrainer trainer =
        kind == LinearModel::Kind::Logistic ? &train_logreg : &train_svm;
    const auto fold_of = stratified_fold_assignment(y, k, seed);

    std::vector<double> sorted_grid(grid.begin(), grid.end());
    std::sort(sorted_grid.begin(), sorted_grid.end());

    GridSearchResult result;
    std::vector<SparseVector> train_x, test_x;
    std::vector<Label> train_y, test_y;
    for (const double c : sorted_grid) {
        GridPoint point;
        point.c_value = c;
        for (std::size_t fold = 0; fold < k; ++fold) {
            train_x.clear();
            train_y.clear();
            test_x.clear();
            test_y.clear();
            for (std::size_t i = 0; i < X.size(); ++i) {
                if (fold_of[i] == fold) {
                    test_x.push_back(X[i]);
                    test_y.push_back(y[i]);
                } else {
                    train_x.push_back(X[i]);
                    train_y.push_back(y[i]);
                }
            }
            TrainConfig config = base_config;
            config.c_value = c;
            const LinearModel model = trainer(train_x, train_y, config, nullptr);
            std::vector<Label> pred;
            pred.reserve(test_x.size());
            for (const auto& x : test_x) pred.push_back(predict(model, x).label);
            point.fold_scores.push_back(metrics(confusion(test_y, pred)).f1_weighted);
        }
        double mean = 0.0;
        for (const double s : point.fold_scores) mean += s;
        mean /= static_cast<double>(point.fold_scores.size());
        double var = 0.0;
        for (const double s : point.fold_scores) var += (s - mean) * (s - mean);
        var /= static_cast<double>(point.fold_scores.size());
        point.mean_score = mean;
        point.std_score = std::sqrt(var);
        result.table.push_back(std::move(point));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < result.table.size(); ++i)
        if (result.table[i].mean_score > result.table[best].mean_score) best = i;
    result.best_c = result.table[best].c_value;
    return result;
}

}  // namespace senti
