#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "senti/csv.hpp"
#include "senti/error.hpp"
#include "senti/rng.hpp"
#include "senti/unicode.hpp"

namespace senti {

// Canonical integer encoding: Negative=0, Neutral=1, Positive=2. The encoding
// is part of the persistence and wire formats, so it must never change.
enum class Label : int { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, 3> kAllLabels = {Label::Negative, Label::Neutral,
                                                    Label::Positive};

inline const char* to_string(Label l) {
    switch (l) {
        case Label::Negative: return "negative";
        case Label::Neutral: return "neutral";
        case Label::Positive: return "positive";
    }
    return "?";
}

inline int index_of(Label l) { return static_cast<int>(l); }

inline std::optional<Label> label_from_index(int i) {
    if (i < 0 || i >= kNumClasses) return std::nullopt;
    return static_cast<Label>(i);
}

// Case-insensitive parse of "negative"/"neutral"/"positive".
inline std::optional<Label> parse_label(std::string_view s) {
    std::string lower;
    lower.reserve(s.size());
    for (const char ch : s)
        lower.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch + 0x20) : ch);
    if (lower == "negative") return Label::Negative;
    if (lower == "neutral") return Label::Neutral;
    if (lower == "positive") return Label::Positive;
    return std::nullopt;
}

struct LabeledDocument {
    std::string id;
    std::string text;
    Label label = Label::Neutral;
    std::optional<std::string> selected_text;  // carried through, unused by training

    bool operator==(const LabeledDocument&) const = default;
};

struct DatasetSplit {
    std::vector<LabeledDocument> train;
    std::vector<LabeledDocument> test;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

// Loads a labeled dataset with header columns textID,text,selected_text,sentiment
// (selected_text optional; column order taken from the header). Invalid UTF-8
// is replaced with U+FFFD; structural problems are hard errors.
inline std::vector<LabeledDocument> load_csv(std::istream& in) {
    if (!in) throw IoFailure("cannot read dataset stream");
    csv::Reader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw MalformedRow(0, "missing header");

    int col_id = -1, col_text = -1, col_selected = -1, col_sentiment = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& name = fields[i];
        if (name == "textID") col_id = static_cast<int>(i);
        else if (name == "text") col_text = static_cast<int>(i);
        else if (name == "selected_text") col_selected = static_cast<int>(i);
        else if (name == "sentiment") col_sentiment = static_cast<int>(i);
    }
    if (col_id < 0 || col_text < 0 || col_sentiment < 0)
        throw MalformedRow(1, "header must contain textID, text and sentiment columns");
    const std::size_t expected_cols = fields.size();

    std::vector<LabeledDocument> docs;
    while (reader.next(fields)) {
        const std::size_t row = reader.record_number();
        if (fields.size() != expected_cols)
            throw MalformedRow(row, "expected " + std::to_string(expected_cols) +
                                        " columns, got " + std::to_string(fields.size()));
        LabeledDocument doc;
        doc.id = unicode::sanitize(fields[static_cast<std::size_t>(col_id)]);
        if (doc.id.empty()) throw MalformedRow(row, "empty textID");
        doc.text = unicode::sanitize(fields[static_cast<std::size_t>(col_text)]);
        if (col_selected >= 0)
            doc.selected_text = unicode::sanitize(fields[static_cast<std::size_t>(col_selected)]);
        const std::string& sentiment = fields[static_cast<std::size_t>(col_sentiment)];
        const auto label = parse_label(sentiment);
        if (!label) throw UnknownLabel(sentiment, row);
        doc.label = *label;
        docs.push_back(std::move(doc));
    }
    return docs;
}

inline void write_csv(std::ostream& out, std::span<const LabeledDocument> docs) {
    csv::write_record(out, {"textID", "text", "selected_text", "sentiment"});
    for (const auto& d : docs)
        csv::write_record(out, {d.id, d.text, d.selected_text.value_or(""), to_string(d.label)});
}

inline std::array<std::size_t, 3> label_distribution(std::span<const LabeledDocument> docs) {
    std::array<std::size_t, 3> counts{};
    for (const auto& d : docs) ++counts[static_cast<std::size_t>(index_of(d.label))];
    return counts;
}

// Stratified, seeded train/test split. |train| = round(ratio*n) overall and
// per class |train_c| is floor(ratio*n_c) or ceil(ratio*n_c), with the
// overall total reconciled by largest fractional remainder. Order within each
// part follows the input order, so the result is deterministic for a fixed
// (docs, ratio, seed).
inline DatasetSplit split(std::span<const LabeledDocument> docs, double ratio,
                          std::uint64_t seed = 42) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw InvalidRatio("split ratio must be in (0,1), got " + std::to_string(ratio));
    if (docs.empty()) throw InvalidRatio("cannot split an empty dataset");

    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < docs.size(); ++i)
        by_class[static_cast<std::size_t>(index_of(docs[i].label))].push_back(i);

    std::mt19937_64 rng(seed);
    for (auto& group : by_class) deterministic_shuffle(group, rng);

    const std::size_t n = docs.size();
    const auto target_total =
        static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

    std::array<std::size_t, 3> take{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double exact = ratio * static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
        take[static_cast<std::size_t>(c)] = static_cast<std::size_t>(std::floor(exact));
        remainder[static_cast<std::size_t>(c)] = exact - std::floor(exact);
        assigned += take[static_cast<std::size_t>(c)];
    }
    // Hand out the leftover slots by largest remainder, ties to the lower class.
    while (assigned < target_total) {
        int best = -1;
        for (int c = 0; c < kNumClasses; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            if (take[uc] >= by_class[uc].size()) continue;
            if (best < 0 || remainder[uc] > remainder[static_cast<std::size_t>(best)]) best = c;
        }
        if (best < 0) break;
        ++take[static_cast<std::size_t>(best)];
        remainder[static_cast<std::size_t>(best)] = -1.0;
        ++assigned;
    }

    std::vector<std::size_t> train_idx, test_idx;
    train_idx.reserve(target_total);
    test_idx.reserve(n - target_total);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        const auto& group = by_class[uc];
        for (std::size_t j = 0; j < group.size(); ++j)
            (j < take[uc] ? train_idx : test_idx).push_back(group[j]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    DatasetSplit out;
    out.seed = seed;
    out.ratio = ratio;
    out.train.reserve(train_idx.size());
    out.test.reserve(test_idx.size());
    for (const std::size_t i : train_idx) out.train.push_back(docs[i]);
    for (const std::size_t i : test_idx) out.test.push_back(docs[i]);
    return out;
}

}  // namespace senti
