#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "senti/bundle.hpp"
#include "senti/error.hpp"
#include "senti/sha256.hpp"

namespace senti {

struct StreamRecord {
    std::string id;
    std::string text;
    std::optional<std::int64_t> ts_ms;  // event time; absent -> ingest time
};

struct ClassifiedRecord {
    std::string id;  // already anonymized
    Label label = Label::Neutral;
    std::array<double, 3> scores{};
    std::int64_t ts_ms = 0;
    std::string model_version;
};

// Mentions become the literal "@user"; the record id becomes a keyed hash so
// the same key always maps an id to the same opaque value. Anonymization is
// not optional in the ingest path.
inline std::string anonymize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto is_word = [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
               (ch >= '0' && ch <= '9') || ch == '_';
    };
    while (i < text.size()) {
        if (text[i] == '@' && i + 1 < text.size() && is_word(text[i + 1])) {
            ++i;
            while (i < text.size() && is_word(text[i])) ++i;
            out += "@user";
            continue;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

inline StreamRecord anonymize(StreamRecord record, std::string_view hash_key) {
    record.id = hmac_sha256_hex(hash_key, record.id).substr(0, 16);
    record.text = anonymize_text(record.text);
    return record;
}

inline ClassifiedRecord classify_record(const StreamRecord& record, const ModelBundle& bundle,
                                        std::string_view hash_key,
                                        std::int64_t ingest_time_ms) {
    const StreamRecord anon = anonymize(record, hash_key);
    const Prediction pred = classify_text(bundle, anon.text);
    ClassifiedRecord out;
    out.id = anon.id;
    out.label = pred.label;
    out.scores = pred.scores;
    out.ts_ms = anon.ts_ms.value_or(ingest_time_ms);
    out.model_version = bundle.model_version;
    return out;
}

// ---------------------------------------------------------------------------
// Trend aggregation
// ---------------------------------------------------------------------------

struct TrendBucket {
    std::int64_t bucket_start = 0;  // unix seconds, multiple of bucket_seconds
    std::array<std::uint64_t, 3> counts{};  // neg, neu, pos

    bool operator==(const TrendBucket&) const = default;
};

// Tumbling windows keyed by event time. The watermark is the newest bucket
// ever seen; buckets older than (watermark - retained_buckets + 1) are out of
// retention. A record landing below the retention floor increments
// dropped_late; advancing the watermark folds evicted buckets into
// dropped_late as well, so for any arrival order of the same record multiset
// the final window state is identical and
//   classified == sum(retained bucket counts) + dropped_late.
class TrendWindow {
public:
    static constexpr std::int64_t kMaxQueryBuckets = 100000;

    explicit TrendWindow(std::int64_t bucket_seconds = 60, std::size_t retained_buckets = 1440)
        : bucket_seconds_(bucket_seconds), retained_buckets_(retained_buckets) {
        if (bucket_seconds_ <= 0) throw InvalidRange("bucket_seconds must be positive");
        if (retained_buckets_ == 0) throw InvalidRange("retained_buckets must be positive");
    }

    std::int64_t bucket_seconds() const { return bucket_seconds_; }
    std::size_t retained_buckets() const { return retained_buckets_; }
    std::uint64_t dropped_late() const { return dropped_late_; }

    std::int64_t bucket_start_for(std::int64_t ts_ms) const {
        std::int64_t sec = ts_ms / 1000;
        if (ts_ms % 1000 < 0) --sec;  // floor for negative timestamps
        std::int64_t b = sec / bucket_seconds_;
        if (sec % bucket_seconds_ < 0) --b;
        return b * bucket_seconds_;
    }

    void update(const ClassifiedRecord& rec) {
        const std::int64_t bucket = bucket_start_for(rec.ts_ms);
        if (has_watermark_ && bucket < retention_floor()) {
            ++dropped_late_;
            return;
        }
        buckets_[bucket][static_cast<std::size_t>(index_of(rec.label))] += 1;
        if (!has_watermark_ || bucket > watermark_) {
            watermark_ = bucket;
            has_watermark_ = true;
            evict_below(retention_floor());
        }
    }

    // Buckets whose start lies in [from_ts, to_ts] (unix seconds), ascending,
    // zero-filled. Queries are read-only.
    std::vector<TrendBucket> query(std::int64_t from_ts, std::int64_t to_ts) const {
        if (from_ts > to_ts) throw InvalidRange("query_trend: from > to");
        if ((to_ts - from_ts) / bucket_seconds_ > kMaxQueryBuckets)
            throw InvalidRange("query_trend: range spans too many buckets");
        std::vector<TrendBucket> series;
        const std::int64_t first = first_bucket_at_or_above(from_ts);
        for (std::int64_t b = first; b <= to_ts; b += bucket_seconds_) {
            TrendBucket tb;
            tb.bucket_start = b;
            const auto it = buckets_.find(b);
            if (it != buckets_.end()) tb.counts = it->second;
            series.push_back(tb);
        }
        return series;
    }

    std::uint64_t retained_total() const {
        std::uint64_t n = 0;
        for (const auto& [start, counts] : buckets_)
            for (const auto c : counts) n += c;
        return n;
    }

    const std::map<std::int64_t, std::array<std::uint64_t, 3>>& buckets() const {
        return buckets_;
    }

private:
    std::int64_t retention_floor() const {
        return watermark_ - bucket_seconds_ * (static_cast<std::int64_t>(retained_buckets_) - 1);
    }

    std::int64_t first_bucket_at_or_above(std::int64_t ts) const {
        std::int64_t b = ts / bucket_seconds_;
        if (ts % bucket_seconds_ < 0) --b;
        std::int64_t start = b * bucket_seconds_;
        if (start < ts) start += bucket_seconds_;
        return start;
    }

    void evict_below(std::int64_t floor) {
        for (auto it = buckets_.begin(); it != buckets_.end() && it->first < floor;) {
            for (const auto c : it->second) dropped_late_ += c;
            it = buckets_.erase(it);
        }
    }

    std::int64_t bucket_seconds_;
    std::size_t retained_buckets_;
    std::map<std::int64_t, std::array<std::uint64_t, 3>> buckets_;
    std::int64_t watermark_ = 0;
    bool has_watermark_ = false;
    std::uint64_t dropped_late_ = 0;
};

// ---------------------------------------------------------------------------
// NDJSON ingest
// ---------------------------------------------------------------------------

struct DeadLetter {
    std::string line;
    std::string reason;
};

inline StreamRecord parse_stream_record(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("invalid json: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("record must be a json object");
    StreamRecord rec;
    if (!j.contains("id") || !j["id"].is_string())
        throw SchemaError("record needs a string \"id\"");
    if (!j.contains("text") || !j["text"].is_string())
        throw SchemaError("record needs a string \"text\"");
    rec.id = j["id"].get<std::string>();
    rec.text = j["text"].get<std::string>();
    if (j.contains("ts")) {
        if (!j["ts"].is_number_integer())
            throw SchemaError("\"ts\" must be integer milliseconds");
        rec.ts_ms = j["ts"].get<std::int64_t>();
    }
    return rec;  // unknown fields are ignored
}

inline nlohmann::ordered_json to_json(const ClassifiedRecord& rec) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["label"] = to_string(rec.label);
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const double s : rec.scores)
        scores.push_back(std::isfinite(s) ? s : -std::numeric_limits<double>::max());
    j["scores"] = std::move(scores);
    j["ts"] = rec.ts_ms;
    j["model_version"] = rec.model_version;
    return j;
}

// One service instance: a loaded bundle, a trend window and conservation
// counters. Classification is pure, so concurrent callers only contend on the
// short aggregation lock; ingested == classified + dead_lettered always holds.
class StreamService {
public:
    using Clock = std::function<std::int64_t()>;  // unix milliseconds

    StreamService(const ModelBundle& bundle, std::string hash_key,
                  std::int64_t bucket_seconds = 60, std::size_t retained_buckets = 1440,
                  Clock clock = nullptr)
        : bundle_(bundle),
          hash_key_(std::move(hash_key)),
          window_(bucket_seconds, retained_buckets),
          clock_(clock ? std::move(clock) : [] {
              return std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                  .count();
          }) {}

    // Parses, classifies and aggregates one NDJSON line.
    std::variant<ClassifiedRecord, DeadLetter> ingest_line(std::string_view line) {
        {
            std::lock_guard lock(mutex_);
            ++ingested_;
        }
        StreamRecord rec;
        try {
            rec = parse_stream_record(line);
        } catch (const Error& e) {
            return dead_letter(line, e.what());
        }
        return ingest_record(rec, /*count_ingest=*/false);
    }

    std::variant<ClassifiedRecord, DeadLetter> ingest_record(const StreamRecord& rec,
                                                             bool count_ingest = true) {
        if (count_ingest) {
            std::lock_guard lock(mutex_);
            ++ingested_;
        }
        try {
            const ClassifiedRecord out = classify_record(rec, bundle_, hash_key_, clock_());
            std::lock_guard lock(mutex_);
            ++classified_;
            window_.update(out);
            return out;
        } catch (const std::exception& e) {
            return dead_letter("id=" + rec.id, e.what());
        }
    }

    std::vector<TrendBucket> query_trend(std::int64_t from_ts, std::int64_t to_ts) const {
        std::lock_guard lock(mutex_);
        return window_.query(from_ts, to_ts);
    }

    struct Counters {
        std::uint64_t ingested = 0;
        std::uint64_t classified = 0;
        std::uint64_t dead_lettered = 0;
        std::uint64_t dropped_late = 0;
    };

    Counters counters() const {
        std::lock_guard lock(mutex_);
        return {ingested_, classified_, dead_lettered_, window_.dropped_late()};
    }

    // Copy of the window state under the lock; tests use this for the
    // conservation and permutation-invariance checks.
    std::map<std::int64_t, std::array<std::uint64_t, 3>> window_snapshot() const {
        std::lock_guard lock(mutex_);
        return window_.buckets();
    }

    std::uint64_t retained_total() const {
        std::lock_guard lock(mutex_);
        return window_.retained_total();
    }

    std::int64_t bucket_seconds() const { return window_.bucket_seconds(); }
    const ModelBundle& bundle() const { return bundle_; }
    const std::string& model_version() const { return bundle_.model_version; }

private:
    DeadLetter dead_letter(std::string_view line, std::string reason) {
        std::lock_guard lock(mutex_);
        ++dead_lettered_;
        return DeadLetter{std::string(line), std::move(reason)};
    }

    const ModelBundle& bundle_;
    std::string hash_key_;
    TrendWindow window_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::uint64_t ingested_ = 0;
    std::uint64_t classified_ = 0;
    std::uint64_t dead_lettered_ = 0;
};

// Pumps NDJSON lines from `in`: classified records go to `out` as NDJSON,
// failures to `dead` as {"line","reason"} objects. Empty lines are skipped.
inline void process_stream(StreamService& service, std::istream& in, std::ostream& out,
                           std::ostream* dead = nullptr) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto result = service.ingest_line(line);
        if (const auto* rec = std::get_if<ClassifiedRecord>(&result)) {
            out << to_json(*rec).dump() << '\n';
        } else if (dead) {
            const auto& dl = std::get<DeadLetter>(result);
            nlohmann::ordered_json j;
            j["line"] = dl.line;
            j["reason"] = dl.reason;
            *dead << j.dump() << '\n';
        }
    }
}

}  // namespace senti
