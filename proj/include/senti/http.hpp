#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "senti/service.hpp"

namespace senti {

// HTTP surface over a StreamService:
//   POST /classify  one StreamRecord JSON -> ClassifiedRecord JSON (counted
//                   like any other ingested record)
//   GET  /trend     ?from=&to=[&bucket=] -> {"bucket_seconds","series":[...]}
//                   bucket may be a positive multiple of the window's bucket
//                   size and re-buckets the series on the fly
//   GET  /health    model_version, uptime and conservation counters
inline void wire_routes(httplib::Server& server, StreamService& service) {
    const auto started = std::chrono::steady_clock::now();

    server.Post("/classify", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto result = service.ingest_line(req.body);
        if (const auto* rec = std::get_if<ClassifiedRecord>(&result)) {
            res.set_content(to_json(*rec).dump(), "application/json");
            return;
        }
        const auto& dl = std::get<DeadLetter>(result);
        nlohmann::ordered_json j;
        j["error"] = dl.reason;
        res.status = 400;
        res.set_content(j.dump(), "application/json");
    });

    server.Get("/trend", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto fail = [&res](int status, const std::string& msg) {
            nlohmann::ordered_json j;
            j["error"] = msg;
            res.status = status;
            res.set_content(j.dump(), "application/json");
        };
        std::int64_t from = 0, to = 0, bucket = service.bucket_seconds();
        try {
            if (!req.has_param("from") || !req.has_param("to"))
                return fail(400, "required query parameters: from, to (unix seconds)");
            from = std::stoll(req.get_param_value("from"));
            to = std::stoll(req.get_param_value("to"));
            if (req.has_param("bucket")) bucket = std::stoll(req.get_param_value("bucket"));
        } catch (const std::exception&) {
            return fail(400, "from/to/bucket must be integers");
        }
        if (bucket <= 0 || bucket % service.bucket_seconds() != 0)
            return fail(400, "bucket must be a positive multiple of " +
                                 std::to_string(service.bucket_seconds()));
        std::vector<TrendBucket> series;
        try {
            series = service.query_trend(from, to);
        } catch (const InvalidRange& e) {
            return fail(400, e.what());
        }
        nlohmann::ordered_json out;
        out["bucket_seconds"] = bucket;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        if (bucket == service.bucket_seconds()) {
            for (const auto& tb : series) {
                nlohmann::ordered_json j;
                j["bucket_start"] = tb.bucket_start;
                j["neg"] = tb.counts[0];
                j["neu"] = tb.counts[1];
                j["pos"] = tb.counts[2];
                arr.push_back(std::move(j));
            }
        } else {
            // aggregate into coarser tumbling buckets aligned to `bucket`
            std::map<std::int64_t, std::array<std::uint64_t, 3>> coarse;
            for (const auto& tb : series) {
                std::int64_t b = tb.bucket_start / bucket;
                if (tb.bucket_start % bucket < 0) --b;
                auto& counts = coarse[b * bucket];
                for (std::size_t c = 0; c < 3; ++c) counts[c] += tb.counts[c];
            }
            for (const auto& [start, counts] : coarse) {
                nlohmann::ordered_json j;
                j["bucket_start"] = start;
                j["neg"] = counts[0];
                j["neu"] = counts[1];
                j["pos"] = counts[2];
                arr.push_back(std::move(j));
            }
        }
        out["series"] = std::move(arr);
        res.set_content(out.dump(), "application/json");
    });

    server.Get("/health", [&service, started](const httplib::Request&, httplib::Response& res) {
        const auto counters = service.counters();
        const auto uptime = std::chrono::duration_cast<std::chrono::seconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        nlohmann::ordered_json j;
        j["model_version"] = service.model_version();
        j["uptime_seconds"] = uptime;
        j["ingested"] = counters.ingested;
        j["classified"] = counters.classified;
        j["dead_lettered"] = counters.dead_lettered;
        j["dropped_late"] = counters.dropped_late;
        res.set_content(j.dump(), "application/json");
    });
}

}  // namespace senti
