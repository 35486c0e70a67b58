#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "senti/error.hpp"
#include "senti/preprocess.hpp"
#include "senti/sparse.hpp"

namespace senti {

inline constexpr std::size_t kDefaultMaxFeatures = 10000;

// Fitted vocabulary: dense indices 0..V-1 assigned by descending document
// frequency, ties by ascending lexicographic order.
struct Vocabulary {
    std::vector<std::string> terms;                            // index -> term
    std::unordered_map<std::string, std::uint32_t> term_to_index;
    std::vector<std::uint32_t> document_frequency;             // index -> df
    std::size_t max_features = kDefaultMaxFeatures;

    std::uint32_t size() const { return static_cast<std::uint32_t>(terms.size()); }
};

struct TfIdfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;  // length V, every weight >= 1
    std::size_t n_docs = 0;

    std::uint32_t dim() const { return vocabulary.size(); }
};

// Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1. Monotonically
// non-increasing in df; equals exactly 1 when df == N.
inline double idf_weight(std::size_t df, std::size_t n_docs) {
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

inline Vocabulary fit_vocabulary(std::span<const TokenSequence> corpus,
                                 std::size_t max_features = kDefaultMaxFeatures) {
    // std::map keeps terms lexicographically sorted, which settles df ties
    // without a second comparator.
    std::map<std::string, std::uint32_t> df;
    std::vector<std::string_view> uniq;
    for (const auto& tokens : corpus) {
        uniq.assign(tokens.begin(), tokens.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (const auto t : uniq) ++df[std::string(t)];
    }

    std::vector<std::pair<const std::string*, std::uint32_t>> ranked;
    ranked.reserve(df.size());
    for (const auto& [term, count] : df) ranked.emplace_back(&term, count);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_features) ranked.resize(max_features);

    Vocabulary vocab;
    vocab.max_features = max_features;
    vocab.terms.reserve(ranked.size());
    vocab.document_frequency.reserve(ranked.size());
    vocab.term_to_index.reserve(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        vocab.terms.push_back(*ranked[i].first);
        vocab.document_frequency.push_back(ranked[i].second);
        vocab.term_to_index.emplace(*ranked[i].first, static_cast<std::uint32_t>(i));
    }
    return vocab;
}

inline TfIdfModel fit_tfidf(std::span<const TokenSequence> corpus,
                            std::size_t max_features = kDefaultMaxFeatures) {
    TfIdfModel model;
    model.vocabulary = fit_vocabulary(corpus, max_features);
    model.n_docs = corpus.size();
    model.idf.reserve(model.vocabulary.size());
    for (const std::uint32_t df : model.vocabulary.document_frequency)
        model.idf.push_back(idf_weight(df, model.n_docs));
    return model;
}

// tf * idf per in-vocabulary term, then L2 normalization. Out-of-vocabulary
// tokens are ignored; an all-OOV document becomes the zero vector.
inline SparseVector transform(const TokenSequence& tokens, const TfIdfModel& model) {
    std::map<std::uint32_t, std::uint32_t> counts;  // ordered: entries come out index-sorted
    for (const auto& t : tokens) {
        const auto it = model.vocabulary.term_to_index.find(t);
        if (it != model.vocabulary.term_to_index.end()) ++counts[it->second];
    }
    SparseVector vec;
    vec.dim = model.dim();
    vec.entries.reserve(counts.size());
    for (const auto& [index, tf] : counts)
        vec.entries.push_back({index, static_cast<double>(tf) * model.idf[index]});
    vec.l2_normalize();
    return vec;
}

inline std::vector<SparseVector> transform_corpus(std::span<const TokenSequence> corpus,
                                                  const TfIdfModel& model) {
    std::vector<SparseVector> out;
    out.reserve(corpus.size());
    for (const auto& tokens : corpus) out.push_back(transform(tokens, model));
    return out;
}

}  // namespace senti
