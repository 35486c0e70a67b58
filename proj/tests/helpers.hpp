#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "senti/corpus.hpp"
#include "senti/features.hpp"
#include "senti/models.hpp"
#include "senti/preprocess.hpp"
#include "senti/rng.hpp"
#include "senti/sparse.hpp"

namespace testing {

inline senti::Label random_label(std::mt19937_64& rng) {
    return static_cast<senti::Label>(senti::bounded_rand(rng, 3));
}

inline std::vector<senti::Label> random_labels(std::mt19937_64& rng, std::size_t n) {
    std::vector<senti::Label> y;
    y.reserve(n);
    for (std::size_t i = 0; i < n; ++i) y.push_back(random_label(rng));
    return y;
}

// Random sparse vector with strictly increasing indices and weights in (0,1].
inline senti::SparseVector random_vector(std::mt19937_64& rng, std::uint32_t dim,
                                         std::size_t max_nnz) {
    senti::SparseVector v;
    v.dim = dim;
    const std::size_t nnz = senti::bounded_rand(rng, max_nnz + 1);
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < nnz; ++i)
        idx.push_back(static_cast<std::uint32_t>(senti::bounded_rand(rng, dim)));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (const auto i : idx) {
        const double w = (static_cast<double>(rng() % 1000) + 1.0) / 1000.0;
        v.entries.push_back({i, w});
    }
    return v;
}

// Small synthetic sentiment corpus: each class leans on its own token pool
// with a shared neutral pool mixed in.
struct SyntheticCorpus {
    std::vector<senti::LabeledDocument> docs;
};

inline SyntheticCorpus make_synthetic_corpus(std::size_t n_docs, std::uint64_t seed,
                                             double noise = 0.25) {
    static const std::vector<std::string> neg = {"terrible", "awful",  "hate", "sad",
                                                 "worst",    "angry",  "bad",  "cry",
                                                 "broken",   "miss"};
    static const std::vector<std::string> pos = {"love",   "great", "happy",  "wonderful",
                                                 "best",   "fun",   "amazing", "smile",
                                                 "enjoy",  "cool"};
    static const std::vector<std::string> neu = {"today", "work",  "phone", "time", "going",
                                                 "home",  "lunch", "car",   "week", "watch",
                                                 "day",   "thing", "people", "see",  "make"};
    std::mt19937_64 rng(seed);
    SyntheticCorpus out;
    out.docs.reserve(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto label = static_cast<senti::Label>(i % 3);
        const std::vector<std::string>* pool = &neu;
        if (label == senti::Label::Negative) pool = &neg;
        if (label == senti::Label::Positive) pool = &pos;
        std::string text;
        const std::size_t len = 4 + senti::bounded_rand(rng, 8);
        for (std::size_t t = 0; t < len; ++t) {
            const bool use_neutral =
                label == senti::Label::Neutral ||
                (static_cast<double>(rng() % 1000) / 1000.0) < noise;
            const auto& source = use_neutral ? neu : *pool;
            if (!text.empty()) text += ' ';
            text += source[senti::bounded_rand(rng, source.size())];
        }
        senti::LabeledDocument doc;
        doc.id = "doc" + std::to_string(i);
        doc.text = text;
        doc.label = label;
        out.docs.push_back(std::move(doc));
    }
    return out;
}

}  // namespace testing
