#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "senti/corpus.hpp"
#include "senti/error.hpp"

namespace senti {

// 3x3 counts, rows = true label, columns = predicted label, order Neg,Neu,Pos.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, 3>, 3> cells{};

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& row : cells)
            for (const auto c : row) n += c;
        return n;
    }

    std::uint64_t row_sum(int t) const {
        std::uint64_t n = 0;
        for (const auto c : cells[static_cast<std::size_t>(t)]) n += c;
        return n;
    }

    std::uint64_t col_sum(int p) const {
        std::uint64_t n = 0;
        for (const auto& row : cells) n += row[static_cast<std::size_t>(p)];
        return n;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;

    bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    std::array<ClassMetrics, 3> per_class{};
    double precision_macro = 0.0, recall_macro = 0.0, f1_macro = 0.0;
    double precision_weighted = 0.0, recall_weighted = 0.0, f1_weighted = 0.0;
    bool zero_division = false;  // some 0/0 metric was defined as 0

    bool operator==(const MetricsReport&) const = default;
};

inline ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred) {
    if (y_true.size() != y_pred.size())
        throw LengthMismatch("confusion: |y_true| != |y_pred|");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.cells[static_cast<std::size_t>(index_of(y_true[i]))]
                  [static_cast<std::size_t>(index_of(y_pred[i]))];
    return cm;
}

// precision_c = cell[c][c]/colsum_c, recall_c = cell[c][c]/rowsum_c, f1 their
// harmonic mean; every 0/0 is defined as 0 and flips the zero_division flag.
// Macro averages run over all three classes; weighted averages use supports.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw EmptyMatrix("metrics: empty confusion matrix");

    MetricsReport report;
    std::uint64_t trace = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        const std::uint64_t tp = cm.cells[uc][uc];
        const std::uint64_t col = cm.col_sum(c);
        const std::uint64_t row = cm.row_sum(c);
        trace += tp;

        ClassMetrics m;
        m.support = row;
        if (col == 0) {
            m.precision = 0.0;
            report.zero_division = true;
        } else {
            m.precision = static_cast<double>(tp) / static_cast<double>(col);
        }
        if (row == 0) {
            m.recall = 0.0;
            report.zero_division = true;
        } else {
            m.recall = static_cast<double>(tp) / static_cast<double>(row);
        }
        if (m.precision + m.recall == 0.0) {
            m.f1 = 0.0;
            if (row != 0 || col != 0) report.zero_division = true;
        } else {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        }
        report.per_class[uc] = m;

        report.precision_macro += m.precision / kNumClasses;
        report.recall_macro += m.recall / kNumClasses;
        report.f1_macro += m.f1 / kNumClasses;
        const double weight = static_cast<double>(row) / static_cast<double>(total);
        report.precision_weighted += weight * m.precision;
        report.recall_weighted += weight * m.recall;
        report.f1_weighted += weight * m.f1;
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { PlainTable, Csv, JsonLines };

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string csv_header() {
    std::string h = "model,accuracy,precision_weighted,recall_weighted,f1_weighted,"
                    "precision_macro,recall_macro,f1_macro";
    for (const Label t : kAllLabels)
        for (const Label p : kAllLabels)
            h += std::string(",cm_") + to_string(t) + "_" + to_string(p);
    return h;
}

inline std::string render_report(const ConfusionMatrix& cm, const MetricsReport& report,
                                 ReportFormat format, const std::string& model_name) {
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Csv: {
            out << csv_header() << '\n';
            out << model_name << ',' << format_double(report.accuracy) << ','
                << format_double(report.precision_weighted) << ','
                << format_double(report.recall_weighted) << ','
                << format_double(report.f1_weighted) << ','
                << format_double(report.precision_macro) << ','
                << format_double(report.recall_macro) << ','
                << format_double(report.f1_macro);
            for (int t = 0; t < kNumClasses; ++t)
                for (int p = 0; p < kNumClasses; ++p)
                    out << ',' << cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
            out << '\n';
            break;
        }
        case ReportFormat::JsonLines: {
            nlohmann::ordered_json j;
            j["model"] = model_name;
            j["accuracy"] = report.accuracy;
            j["precision_weighted"] = report.precision_weighted;
            j["recall_weighted"] = report.recall_weighted;
            j["f1_weighted"] = report.f1_weighted;
            j["precision_macro"] = report.precision_macro;
            j["recall_macro"] = report.recall_macro;
            j["f1_macro"] = report.f1_macro;
            nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
            for (int c = 0; c < kNumClasses; ++c) {
                const auto& m = report.per_class[static_cast<std::size_t>(c)];
                per_class[to_string(static_cast<Label>(c))] = {{"precision", m.precision},
                                                               {"recall", m.recall},
                                                               {"f1", m.f1},
                                                               {"support", m.support}};
            }
            j["per_class"] = std::move(per_class);
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (int t = 0; t < kNumClasses; ++t) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (int p = 0; p < kNumClasses; ++p)
                    row.push_back(
                        cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
                rows.push_back(std::move(row));
            }
            j["confusion"] = std::move(rows);
            j["zero_division"] = report.zero_division;
            out << j.dump() << '\n';
            break;
        }
        case ReportFormat::PlainTable: {
            out << "model: " << model_name << '\n';
            out << std::fixed << std::setprecision(4);
            out << "accuracy            " << report.accuracy << '\n';
            for (int c = 0; c < kNumClasses; ++c) {
                const auto& m = report.per_class[static_cast<std::size_t>(c)];
                const std::string name = to_string(static_cast<Label>(c));
                out << "precision_" << name << std::string(10 - name.size(), ' ')
                    << m.precision << '\n';
                out << "recall_" << name << std::string(13 - name.size(), ' ') << m.recall << '\n';
                out << "f1_" << name << std::string(17 - name.size(), ' ') << m.f1 << '\n';
            }
            out << "precision_macro     " << report.precision_macro << '\n';
            out << "recall_macro        " << report.recall_macro << '\n';
            out << "f1_macro            " << report.f1_macro << '\n';
            out << "precision_weighted  " << report.precision_weighted << '\n';
            out << "recall_weighted     " << report.recall_weighted << '\n';
            out << "f1_weighted         " << report.f1_weighted << '\n';
            out << "support             ";
            for (int c = 0; c < kNumClasses; ++c)
                out << report.per_class[static_cast<std::size_t>(c)].support
                    << (c + 1 < kNumClasses ? '/' : '\n');
            if (report.zero_division) out << "warning: zero-division metrics reported as 0\n";
            out << "confusion (rows true, cols predicted; neg/neu/pos):\n";
            for (int t = 0; t < kNumClasses; ++t) {
                out << "  ";
                for (int p = 0; p < kNumClasses; ++p)
                    out << std::setw(8)
                        << cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
                out << '\n';
            }
            break;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Parsing the machine formats back (round-trip support)
// ---------------------------------------------------------------------------

struct ParsedReport {
    std::string model_name;
    ConfusionMatrix cm;
    MetricsReport report;
};

namespace detail {

inline double parse_double_or_throw(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError("report: bad number \"" + std::string(s) + "\"");
    return v;
}

inline std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

}  // namespace detail

// Parses the CSV produced by render_report. Per-class precision/recall/f1 and
// supports are recomputed from the confusion cells, which the format carries
// losslessly.
inline ParsedReport parse_report_csv(std::string_view text) {
    auto lines = detail::split_on(text, '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() != 2 || std::string(lines[0]) != csv_header())
        throw SchemaError("report csv: expected header plus one row");
    const auto fields = detail::split_on(lines[1], ',');
    if (fields.size() != 17) throw SchemaError("report csv: expected 17 fields");
    ParsedReport out;
    out.model_name = std::string(fields[0]);
    std::size_t f = 8;
    for (int t = 0; t < kNumClasses; ++t)
        for (int p = 0; p < kNumClasses; ++p) {
            std::uint64_t v = 0;
            const auto sv = fields[f++];
            const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
            if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size())
                throw SchemaError("report csv: bad cell count");
            out.cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] = v;
        }
    out.report = metrics(out.cm);
    // Cross-check the serialized aggregates against the recomputation.
    const double declared_accuracy = detail::parse_double_or_throw(fields[1]);
    if (declared_accuracy != out.report.accuracy)
        throw SchemaError("report csv: accuracy does not match confusion cells");
    return out;
}

// Parses one json-lines object produced by render_report.
inline ParsedReport parse_report_jsonl(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report json: ") + e.what());
    }
    ParsedReport out;
    try {
        out.model_name = j.at("model").get<std::string>();
        const auto& rows = j.at("confusion");
        for (int t = 0; t < kNumClasses; ++t)
            for (int p = 0; p < kNumClasses; ++p)
                out.cm.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)] =
                    rows.at(static_cast<std::size_t>(t))
                        .at(static_cast<std::size_t>(p))
                        .get<std::uint64_t>();
        out.report = metrics(out.cm);
        if (j.at("accuracy").get<double>() != out.report.accuracy ||
            j.at("f1_weighted").get<double>() != out.report.f1_weighted)
            throw SchemaError("report json: aggregates do not match confusion cells");
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("report json: ") + e.what());
    }
    return out;
}

}  // namespace senti
