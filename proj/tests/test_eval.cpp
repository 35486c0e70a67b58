#include <catch2/catch.hpp>

#include <cmath>
#include <sstream>

#include "senti/bundle.hpp"
#include "senti/eval.hpp"
#include "senti/rng.hpp"
#include "helpers.hpp"

using namespace senti;

namespace {

// Brute-force metrics straight from the label lists, no confusion matrix.
// This is the independent oracle the matrix-based path is checked against.
struct BruteForce {
    double accuracy;
    std::array<double, 3> precision, recall, f1;
    std::array<std::uint64_t, 3> support;
};

BruteForce brute_force(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
    BruteForce out{};
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++hits;
    out.accuracy = static_cast<double>(hits) / static_cast<double>(y_true.size());
    for (int c = 0; c < kNumClasses; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        std::size_t tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const bool t = index_of(y_true[i]) == c;
            const bool p = index_of(y_pred[i]) == c;
            tp += t && p;
            predicted += p;
            actual += t;
        }
        out.support[uc] = actual;
        out.precision[uc] = predicted ? static_cast<double>(tp) / predicted : 0.0;
        out.recall[uc] = actual ? static_cast<double>(tp) / actual : 0.0;
        const double pr = out.precision[uc] + out.recall[uc];
        out.f1[uc] = pr > 0 ? 2 * out.precision[uc] * out.recall[uc] / pr : 0.0;
    }
    return out;
}

}  // namespace

TEST_CASE("confusion counts true rows against predicted columns") {
    SECTION("perfect predictions sit on the diagonal") {
        const std::vector<Label> y = {Label::Negative, Label::Neutral, Label::Neutral,
                                      Label::Positive};
        const auto cm = confusion(y, y);
        CHECK(cm.cells[0][0] == 1);
        CHECK(cm.cells[1][1] == 2);
        CHECK(cm.cells[2][2] == 1);
        CHECK(cm.total() == 4);
    }
    SECTION("documented mixed example") {
        const std::vector<Label> y_true = {Label::Negative, Label::Neutral, Label::Positive};
        const std::vector<Label> y_pred = {Label::Neutral, Label::Neutral, Label::Positive};
        const auto cm = confusion(y_true, y_pred);
        CHECK(cm.cells[0][1] == 1);
        CHECK(cm.cells[1][1] == 1);
        CHECK(cm.cells[2][2] == 1);
        CHECK(cm.total() == 3);
    }
    SECTION("swapping two predictions changes exactly two cells by one") {
        std::mt19937_64 rng(179);
        auto y_true = testing::random_labels(rng, 20);
        auto y_pred = testing::random_labels(rng, 20);
        y_pred[3] = Label::Negative;
        y_pred[7] = Label::Positive;
        const auto before = confusion(y_true, y_pred);
        std::swap(y_pred[3], y_pred[7]);
        const auto after = confusion(y_true, y_pred);
        int changed = 0;
        for (int t = 0; t < 3; ++t)
            for (int p = 0; p < 3; ++p) {
                const auto a = before.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
                const auto b = after.cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
                if (a != b) {
                    ++changed;
                    CHECK((a > b ? a - b : b - a) == 1);
                }
            }
        CHECK(changed <= 4);  // two rows touched, at most two cells each
        CHECK(before.total() == after.total());
    }
    SECTION("length mismatch") {
        const std::vector<Label> a = {Label::Negative};
        CHECK_THROWS_AS(confusion(a, {}), LengthMismatch);
    }
}

TEST_CASE("cell sums are conserved for random inputs of any length") {
    std::mt19937_64 rng(181);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = bounded_rand(rng, 200);
        const auto y_true = testing::random_labels(rng, n);
        const auto y_pred = testing::random_labels(rng, n);
        CHECK(confusion(y_true, y_pred).total() == n);
    }
}

TEST_CASE("metrics on a diagonal matrix are all ones") {
    ConfusionMatrix cm;
    cm.cells = {{{5, 0, 0}, {0, 7, 0}, {0, 0, 9}}};
    const auto report = metrics(cm);
    CHECK(report.accuracy == 1.0);
    for (const auto& m : report.per_class) {
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
    }
    CHECK(report.f1_weighted == 1.0);
    CHECK(report.f1_macro == 1.0);
    CHECK_FALSE(report.zero_division);
}

TEST_CASE("a never-predicted class gets zero precision and f1 by convention") {
    ConfusionMatrix cm;
    cm.cells = {{{0, 4, 0}, {0, 6, 0}, {0, 1, 0}}};  // everything predicted neutral
    const auto report = metrics(cm);
    CHECK(report.per_class[0].precision == 0.0);
    CHECK(report.per_class[0].f1 == 0.0);
    CHECK(report.per_class[2].precision == 0.0);
    CHECK(report.zero_division);
}

TEST_CASE("metrics reproduce the two-class hand example") {
    // [[2,1],[0,3]] embedded in the 3x3 layout, third row/col zero
    ConfusionMatrix cm;
    cm.cells = {{{2, 1, 0}, {0, 3, 0}, {0, 0, 0}}};
    const auto report = metrics(cm);
    CHECK(report.accuracy == Approx(0.8333333333333334).epsilon(1e-15));
    CHECK(report.per_class[0].precision == 1.0);
    CHECK(report.per_class[0].recall == Approx(0.6666666666666666).epsilon(1e-15));
    CHECK(report.per_class[0].f1 == Approx(0.8).epsilon(1e-15));
    CHECK(report.zero_division);  // the empty positive class hit 0/0
}

TEST_CASE("metrics rejects an empty matrix") {
    CHECK_THROWS_AS(metrics(ConfusionMatrix{}), EmptyMatrix);
}

TEST_CASE("matrix metrics equal brute-force recomputation on random instances") {
    std::mt19937_64 rng(191);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + bounded_rand(rng, 60);
        const auto y_true = testing::random_labels(rng, n);
        const auto y_pred = testing::random_labels(rng, n);
        const auto report = metrics(confusion(y_true, y_pred));
        const auto oracle = brute_force(y_true, y_pred);

        CHECK(report.accuracy == Approx(oracle.accuracy).epsilon(1e-12));
        double weighted_recall = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            CHECK(report.per_class[uc].precision == Approx(oracle.precision[uc]).epsilon(1e-12));
            CHECK(report.per_class[uc].recall == Approx(oracle.recall[uc]).epsilon(1e-12));
            CHECK(report.per_class[uc].f1 == Approx(oracle.f1[uc]).epsilon(1e-12));
            CHECK(report.per_class[uc].support == oracle.support[uc]);
            weighted_recall += (static_cast<double>(oracle.support[uc]) / n) * oracle.recall[uc];
        }
        // weighted recall is accuracy, algebraically
        CHECK(report.recall_weighted == Approx(report.accuracy).epsilon(1e-12));
        CHECK(weighted_recall == Approx(report.accuracy).epsilon(1e-12));

        // range and f1-between-min-max properties
        for (const auto& m : report.per_class) {
            CHECK(m.precision >= 0.0);
            CHECK(m.precision <= 1.0);
            CHECK(m.f1 <= 1.0);
            if (m.precision + m.recall > 0) {
                CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-12);
                CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-12);
            }
        }
    }
}

TEST_CASE("csv report round-trips losslessly") {
    std::mt19937_64 rng(193);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + bounded_rand(rng, 40);
        const auto cm = confusion(testing::random_labels(rng, n), testing::random_labels(rng, n));
        const auto report = metrics(cm);
        const std::string rendered = render_report(cm, report, ReportFormat::Csv, "svm");
        const auto parsed = parse_report_csv(rendered);
        CHECK(parsed.model_name == "svm");
        CHECK(parsed.cm == cm);
        CHECK(parsed.report == report);
    }
}

TEST_CASE("json-lines report round-trips losslessly and is one object per line") {
    std::mt19937_64 rng(197);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 1 + bounded_rand(rng, 40);
        const auto cm = confusion(testing::random_labels(rng, n), testing::random_labels(rng, n));
        const auto report = metrics(cm);
        const std::string rendered = render_report(cm, report, ReportFormat::JsonLines, "nb");
        CHECK(std::count(rendered.begin(), rendered.end(), '\n') == 1);
        CHECK(rendered.back() == '\n');
        const auto parsed = parse_report_jsonl(rendered);
        CHECK(parsed.model_name == "nb");
        CHECK(parsed.cm == cm);
        CHECK(parsed.report == report);
    }
}

TEST_CASE("plain table lists every metric by name") {
    ConfusionMatrix cm;
    cm.cells = {{{2, 1, 0}, {0, 3, 0}, {1, 0, 2}}};
    const std::string table = render_report(cm, metrics(cm), ReportFormat::PlainTable, "logreg");
    for (const std::string name :
         {"accuracy", "precision_negative", "recall_negative", "f1_negative",
          "precision_neutral", "recall_neutral", "f1_neutral", "precision_positive",
          "recall_positive", "f1_positive", "precision_macro", "recall_macro", "f1_macro",
          "precision_weighted", "recall_weighted", "f1_weighted", "support", "confusion"})
        CHECK(table.find(name) != std::string::npos);
}

TEST_CASE("malformed reports raise schema errors") {
    CHECK_THROWS_AS(parse_report_csv("nonsense\n"), SchemaError);
    CHECK_THROWS_AS(parse_report_jsonl("{\"model\":\"x\"}"), SchemaError);
    CHECK_THROWS_AS(parse_report_jsonl("not json"), SchemaError);
}

TEST_CASE("evaluate runs the full pipeline per document") {
    // A memorizing-capacity toy: each class has its own exclusive token.
    std::vector<LabeledDocument> docs;
    for (int i = 0; i < 6; ++i) {
        docs.push_back({"n" + std::to_string(i), "gloom doom", Label::Negative, {}});
        docs.push_back({"u" + std::to_string(i), "table chair", Label::Neutral, {}});
        docs.push_back({"p" + std::to_string(i), "cheer joy", Label::Positive, {}});
    }
    ModelBundle bundle;
    bundle.preprocess = PreprocessConfig::defaults();
    std::vector<TokenSequence> tokens;
    std::vector<Label> y;
    for (const auto& d : docs) {
        tokens.push_back(run_pipeline(d, bundle.preprocess));
        y.push_back(d.label);
    }
    bundle.tfidf = fit_tfidf(tokens);
    TrainConfig config;
    config.c_value = 10.0;
    config.max_epochs = 300;
    bundle.classifier = train_logreg(transform_corpus(tokens, bundle.tfidf), y, config);

    SECTION("training-set evaluation of a separable toy is perfect") {
        const auto [cm, report] = evaluate(bundle, docs);
        CHECK(report.accuracy == 1.0);
        CHECK(cm.total() == docs.size());
    }
    SECTION("single-document accuracy is zero or one") {
        const std::vector<LabeledDocument> single = {docs[0]};
        const auto [cm, report] = evaluate(bundle, single);
        CHECK((report.accuracy == 0.0 || report.accuracy == 1.0));
    }
    SECTION("empty test set is rejected") {
        CHECK_THROWS_AS(evaluate(bundle, {}), EmptyMatrix);
    }
}
