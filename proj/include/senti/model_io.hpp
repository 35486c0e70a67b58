#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "senti/bundle.hpp"
#include "senti/error.hpp"
#include "senti/sha256.hpp"

// Model artifact: a text header followed by a canonical key-value payload.
//
//   SSTM 1
//   model_kind nb|logreg|svm
//   created_unix_seconds <int64>
//   payload_sha256 <64 hex chars of the payload>
//   payload_bytes <byte count of the payload>
//   ---
//   <payload>
//
// The payload carries the preprocessing config, the stopword list (sorted),
// the vocabulary (term, index, df), the idf table, n_docs and the classifier
// parameters. Doubles are serialized with shortest round-trip formatting, so
// a loaded bundle predicts bit-for-bit like the saved one. The payload is
// fully deterministic: saving the same bundle twice gives identical bytes.

namespace senti {

inline constexpr std::string_view kArtifactMagic = "SSTM";
inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void put_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline double get_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError("artifact: bad floating-point value \"" + std::string(s) + "\"");
    return v;
}

inline std::uint64_t get_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError("artifact: bad integer value \"" + std::string(s) + "\"");
    return v;
}

// Line cursor over the payload with "key must match" accessors.
class PayloadReader {
public:
    explicit PayloadReader(std::string_view text) : text_(text) {}

    std::string_view next_line() {
        if (pos_ >= text_.size()) throw SchemaError("artifact: truncated payload");
        const std::size_t nl = text_.find('\n', pos_);
        const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
        std::string_view line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        return line;
    }

    // Returns the remainder of a line expected to start with "<key> ".
    std::string_view expect(std::string_view key) {
        const std::string_view line = next_line();
        if (line.size() < key.size() + 1 || line.substr(0, key.size()) != key ||
            line[key.size()] != ' ')
            throw SchemaError("artifact: expected key \"" + std::string(key) + "\", got \"" +
                              std::string(line) + "\"");
        return line.substr(key.size() + 1);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

inline std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == ' ') {
            if (i > start) out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

}  // namespace detail

inline std::string serialize_payload(const ModelBundle& bundle) {
    std::string p;
    const auto& cfg = bundle.preprocess;
    p += "preprocess.strip_urls ";
    p += cfg.strip_urls ? '1' : '0';
    p += "\npreprocess.strip_mentions ";
    p += cfg.strip_mentions ? '1' : '0';
    p += "\npreprocess.lowercase ";
    p += cfg.lowercase ? '1' : '0';
    p += "\npreprocess.strip_stopwords ";
    p += cfg.strip_stopwords ? '1' : '0';
    p += "\npreprocess.min_token_len " + std::to_string(cfg.min_token_len);

    std::vector<std::string> stopwords(cfg.stopword_list.begin(), cfg.stopword_list.end());
    std::sort(stopwords.begin(), stopwords.end());
    p += "\nstopwords.count " + std::to_string(stopwords.size());
    for (const auto& w : stopwords) p += "\nstopword " + w;

    const auto& vocab = bundle.tfidf.vocabulary;
    p += "\ntfidf.n_docs " + std::to_string(bundle.tfidf.n_docs);
    p += "\nvocab.max_features " + std::to_string(vocab.max_features);
    p += "\nvocab.count " + std::to_string(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i)
        p += "\nterm " + std::to_string(i) + " " + std::to_string(vocab.document_frequency[i]) +
             " " + vocab.terms[i];
    p += "\nidf";
    for (const double v : bundle.tfidf.idf) {
        p += ' ';
        detail::put_double(p, v);
    }

    if (const auto* nb = std::get_if<NaiveBayesModel>(&bundle.classifier)) {
        p += "\nclassifier.kind nb";
        p += "\nnb.alpha ";
        detail::put_double(p, nb->alpha);
        p += "\nnb.dim " + std::to_string(nb->dim);
        p += "\nnb.class_log_prior";
        for (const double v : nb->class_log_prior) {
            p += ' ';
            detail::put_double(p, v);
        }
        for (int c = 0; c < kNumClasses; ++c) {
            p += "\nnb.feature_log_prob." + std::to_string(c);
            for (std::uint32_t t = 0; t < nb->dim; ++t) {
                p += ' ';
                detail::put_double(p, nb->log_prob(c, t));
            }
        }
    } else {
        const auto& lin = std::get<LinearModel>(bundle.classifier);
        p += std::string("\nclassifier.kind ") + to_string(lin.kind);
        p += "\nlinear.c_value ";
        detail::put_double(p, lin.c_value);
        p += "\nlinear.dim " + std::to_string(lin.dim);
        p += "\nlinear.final_objective ";
        detail::put_double(p, lin.final_objective);
        p += "\nlinear.bias";
        for (const double v : lin.bias) {
            p += ' ';
            detail::put_double(p, v);
        }
        for (int c = 0; c < kNumClasses; ++c) {
            p += "\nlinear.weights." + std::to_string(c);
            const auto row = lin.row(c);
            for (const double v : row) {
                p += ' ';
                detail::put_double(p, v);
            }
        }
    }
    p += '\n';
    return p;
}

inline std::string model_version_for_payload(std::string_view payload) {
    return "sstm1-" + sha256_hex(payload).substr(0, 12);
}

// Writes the artifact and returns the bundle's version string. Pass a fixed
// `created_unix_seconds` for reproducible artifacts (the CLI honors
// SOURCE_DATE_EPOCH for exactly this purpose).
inline std::string save_model(const ModelBundle& bundle, std::ostream& out,
                              std::int64_t created_unix_seconds) {
    if (!out) throw IoFailure("save_model: cannot write artifact stream");
    const std::string payload = serialize_payload(bundle);
    out << kArtifactMagic << ' ' << kSchemaVersion << '\n';
    out << "model_kind " << model_kind_name(bundle.classifier) << '\n';
    out << "created_unix_seconds " << created_unix_seconds << '\n';
    out << "payload_sha256 " << sha256_hex(payload) << '\n';
    out << "payload_bytes " << payload.size() << '\n';
    out << "---\n";
    out << payload;
    if (!out) throw IoFailure("save_model: write failed");
    return model_version_for_payload(payload);
}

struct ArtifactInfo {
    std::string model_kind;
    std::int64_t created_unix_seconds = 0;
    std::string payload_sha256;
};

inline ModelBundle load_model(std::istream& in, ArtifactInfo* info = nullptr) {
    if (!in) throw IoFailure("load_model: cannot read artifact stream");

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("artifact: empty stream");
    {
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2 || fields[0] != kArtifactMagic)
            throw SchemaError("artifact: bad magic line \"" + line + "\"");
        const auto version = detail::get_uint(fields[1]);
        if (version != static_cast<std::uint64_t>(kSchemaVersion))
            throw VersionMismatch("artifact: schema_version " + std::string(fields[1]) +
                                  " unsupported (expected " + std::to_string(kSchemaVersion) +
                                  ")");
    }
    ArtifactInfo header;
    const auto header_field = [&](std::string_view key) -> std::string {
        if (!std::getline(in, line)) throw SchemaError("artifact: truncated header");
        if (line.size() < key.size() + 1 || std::string_view(line).substr(0, key.size()) != key ||
            line[key.size()] != ' ')
            throw SchemaError("artifact: expected header key \"" + std::string(key) + "\"");
        return line.substr(key.size() + 1);
    };
    header.model_kind = header_field("model_kind");
    header.created_unix_seconds =
        static_cast<std::int64_t>(detail::get_uint(header_field("created_unix_seconds")));
    header.payload_sha256 = header_field("payload_sha256");
    const std::uint64_t payload_bytes = detail::get_uint(header_field("payload_bytes"));
    if (!std::getline(in, line) || line != "---")
        throw SchemaError("artifact: missing header separator");

    std::string payload(payload_bytes, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != payload_bytes)
        throw CorruptArtifact("artifact: payload shorter than declared");
    if (sha256_hex(payload) != header.payload_sha256)
        throw CorruptArtifact("artifact: payload checksum mismatch");

    detail::PayloadReader reader(payload);
    ModelBundle bundle;
    auto& cfg = bundle.preprocess;
    cfg.strip_urls = detail::get_uint(reader.expect("preprocess.strip_urls")) != 0;
    cfg.strip_mentions = detail::get_uint(reader.expect("preprocess.strip_mentions")) != 0;
    cfg.lowercase = detail::get_uint(reader.expect("preprocess.lowercase")) != 0;
    cfg.strip_stopwords = detail::get_uint(reader.expect("preprocess.strip_stopwords")) != 0;
    cfg.min_token_len = detail::get_uint(reader.expect("preprocess.min_token_len"));
    const std::uint64_t n_stopwords = detail::get_uint(reader.expect("stopwords.count"));
    cfg.stopword_list.clear();
    cfg.stopword_list.reserve(n_stopwords);
    for (std::uint64_t i = 0; i < n_stopwords; ++i)
        cfg.stopword_list.emplace(reader.expect("stopword"));

    bundle.tfidf.n_docs = detail::get_uint(reader.expect("tfidf.n_docs"));
    auto& vocab = bundle.tfidf.vocabulary;
    vocab.max_features = detail::get_uint(reader.expect("vocab.max_features"));
    const std::uint64_t v_count = detail::get_uint(reader.expect("vocab.count"));
    vocab.terms.reserve(v_count);
    vocab.document_frequency.reserve(v_count);
    vocab.term_to_index.reserve(v_count);
    for (std::uint64_t i = 0; i < v_count; ++i) {
        const std::string_view rest = reader.expect("term");
        const std::size_t sp1 = rest.find(' ');
        const std::size_t sp2 = rest.find(' ', sp1 + 1);
        if (sp1 == std::string_view::npos || sp2 == std::string_view::npos)
            throw SchemaError("artifact: malformed term line");
        const auto index = detail::get_uint(rest.substr(0, sp1));
        if (index != i) throw SchemaError("artifact: term indices out of order");
        const auto df = detail::get_uint(rest.substr(sp1 + 1, sp2 - sp1 - 1));
        std::string term(rest.substr(sp2 + 1));
        vocab.document_frequency.push_back(static_cast<std::uint32_t>(df));
        vocab.term_to_index.emplace(term, static_cast<std::uint32_t>(i));
        vocab.terms.push_back(std::move(term));
    }
    {
        const auto fields = detail::split_fields(reader.expect("idf"));
        if (fields.size() != v_count) throw SchemaError("artifact: idf length != vocab size");
        bundle.tfidf.idf.reserve(v_count);
        for (const auto f : fields) bundle.tfidf.idf.push_back(detail::get_double(f));
    }

    const std::string_view kind = reader.expect("classifier.kind");
    if (kind == "nb") {
        NaiveBayesModel nb;
        nb.alpha = detail::get_double(reader.expect("nb.alpha"));
        nb.dim = static_cast<std::uint32_t>(detail::get_uint(reader.expect("nb.dim")));
        if (nb.dim != v_count) throw SchemaError("artifact: nb.dim != vocab size");
        const auto priors = detail::split_fields(reader.expect("nb.class_log_prior"));
        if (priors.size() != 3) throw SchemaError("artifact: expected 3 class log priors");
        for (std::size_t c = 0; c < 3; ++c)
            nb.class_log_prior[c] = detail::get_double(priors[c]);
        nb.feature_log_prob.reserve(3 * static_cast<std::size_t>(nb.dim));
        for (int c = 0; c < kNumClasses; ++c) {
            const auto row =
                detail::split_fields(reader.expect("nb.feature_log_prob." + std::to_string(c)));
            if (row.size() != nb.dim)
                throw SchemaError("artifact: nb.feature_log_prob row length != dim");
            for (const auto f : row) nb.feature_log_prob.push_back(detail::get_double(f));
        }
        bundle.classifier = std::move(nb);
    } else if (kind == "logreg" || kind == "svm") {
        LinearModel lin;
        lin.kind = kind == "logreg" ? LinearModel::Kind::Logistic : LinearModel::Kind::Svm;
        lin.c_value = detail::get_double(reader.expect("linear.c_value"));
        lin.dim = static_cast<std::uint32_t>(detail::get_uint(reader.expect("linear.dim")));
        if (lin.dim != v_count) throw SchemaError("artifact: linear.dim != vocab size");
        lin.final_objective = detail::get_double(reader.expect("linear.final_objective"));
        const auto bias = detail::split_fields(reader.expect("linear.bias"));
        if (bias.size() != 3) throw SchemaError("artifact: expected 3 biases");
        for (std::size_t c = 0; c < 3; ++c) lin.bias[c] = detail::get_double(bias[c]);
        lin.weights.reserve(3 * static_cast<std::size_t>(lin.dim));
        for (int c = 0; c < kNumClasses; ++c) {
            const auto row =
                detail::split_fields(reader.expect("linear.weights." + std::to_string(c)));
            if (row.size() != lin.dim)
                throw SchemaError("artifact: linear.weights row length != dim");
            for (const auto f : row) lin.weights.push_back(detail::get_double(f));
        }
        bundle.classifier = std::move(lin);
    } else {
        throw SchemaError("artifact: unknown classifier.kind \"" + std::string(kind) + "\"");
    }
    if (header.model_kind != model_kind_name(bundle.classifier))
        throw SchemaError("artifact: header model_kind disagrees with payload");

    bundle.model_version = model_version_for_payload(payload);
    if (info) *info = header;
    return bundle;
}

}  // namespace senti
