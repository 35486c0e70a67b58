#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "senti/corpus.hpp"
#include "senti/error.hpp"
#include "senti/stopwords_en.hpp"
#include "senti/unicode.hpp"

// Deterministic text cleaning and tokenization.
//
// clean() removes URL substrings (scheme http:// or https://, case
// insensitive, or a leading www. at a word boundary) up to the next
// whitespace, removes mentions (@ followed by one or more of [A-Za-z0-9_]),
// and lowercases. Whitespace elsewhere is preserved, so clean is idempotent.
//
// tokenize() emits maximal runs of letters, digits and ASCII apostrophe;
// everything else separates tokens. Contractions like "don't" stay together;
// a hashtag's '#' is a separator, so the word part survives.

namespace senti {

using TokenSequence = std::vector<std::string>;

struct PreprocessConfig {
    bool strip_urls = true;
    bool strip_mentions = true;
    bool lowercase = true;
    bool strip_stopwords = true;
    std::unordered_set<std::string> stopword_list;  // entries must be lowercase
    std::size_t min_token_len = 1;

    static PreprocessConfig defaults() {
        PreprocessConfig cfg;
        cfg.stopword_list.reserve(kEnglishStopwords.size());
        for (const auto w : kEnglishStopwords) cfg.stopword_list.emplace(w);
        return cfg;
    }
};

namespace detail {

inline bool is_space(char ch) {
    return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
}

inline bool is_word_char(char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
           ch == '_';
}

inline bool iequal_at(std::string_view s, std::size_t pos, std::string_view lit) {
    if (pos + lit.size() > s.size()) return false;
    for (std::size_t i = 0; i < lit.size(); ++i) {
        char a = s[pos + i];
        if (a >= 'A' && a <= 'Z') a = static_cast<char>(a + 0x20);
        if (a != lit[i]) return false;
    }
    return true;
}

}  // namespace detail

inline std::string clean(std::string_view text, const PreprocessConfig& config) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    bool at_boundary = true;  // start of string or right after whitespace
    while (i < text.size()) {
        if (config.strip_urls &&
            (detail::iequal_at(text, i, "http://") || detail::iequal_at(text, i, "https://") ||
             (at_boundary && detail::iequal_at(text, i, "www.")))) {
            while (i < text.size() && !detail::is_space(text[i])) ++i;
            at_boundary = false;
            continue;
        }
        if (config.strip_mentions && text[i] == '@' && i + 1 < text.size() &&
            detail::is_word_char(text[i + 1])) {
            ++i;
            while (i < text.size() && detail::is_word_char(text[i])) ++i;
            at_boundary = false;
            continue;
        }
        at_boundary = detail::is_space(text[i]);
        out.push_back(text[i]);
        ++i;
    }
    if (config.lowercase) out = unicode::to_lower_copy(out);
    return out;
}

inline TokenSequence tokenize(std::string_view text, std::size_t min_token_len = 1) {
    TokenSequence tokens;
    std::string current;
    std::size_t pos = 0;
    const auto flush = [&] {
        if (!current.empty()) {
            std::size_t cps = 0;
            for (std::size_t p = 0; p < current.size(); ++cps) unicode::decode(current, p);
            if (cps >= min_token_len) tokens.push_back(current);
            current.clear();
        }
    };
    while (pos < text.size()) {
        const char32_t cp = unicode::decode(text, pos);
        if (unicode::is_letter_or_digit(cp) || cp == U'\'') {
            unicode::encode(cp, current);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

inline TokenSequence remove_stopwords(TokenSequence tokens,
                                      const std::unordered_set<std::string>& stopword_list) {
    TokenSequence out;
    out.reserve(tokens.size());
    for (auto& t : tokens)
        if (!stopword_list.contains(t)) out.push_back(std::move(t));
    return out;
}

inline TokenSequence run_pipeline(std::string_view text, const PreprocessConfig& config) {
    TokenSequence tokens = tokenize(clean(text, config), config.min_token_len);
    if (config.strip_stopwords) tokens = remove_stopwords(std::move(tokens), config.stopword_list);
    return tokens;
}

inline TokenSequence run_pipeline(const LabeledDocument& doc, const PreprocessConfig& config) {
    return run_pipeline(doc.text, config);
}

// Stopword file format: one token per line, UTF-8, '#'-prefixed comment
// lines and blank lines ignored.
inline std::vector<std::string> load_stopword_file(std::istream& in) {
    if (!in) throw IoFailure("cannot read stopword stream");
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        words.push_back(unicode::sanitize(line));
    }
    return words;
}

}  // namespace senti
