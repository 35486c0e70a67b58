#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "senti/corpus.hpp"
#include "senti/eval.hpp"
#include "senti/features.hpp"
#include "senti/models.hpp"
#include "senti/preprocess.hpp"

namespace senti {

// Everything needed to go from raw text to a Prediction. The version string
// is assigned by persistence (a digest of the serialized payload) and is
// "unsaved" for in-memory bundles that never hit disk.
struct ModelBundle {
    PreprocessConfig preprocess;
    TfIdfModel tfidf;
    ClassifierModel classifier;
    std::string model_version = "unsaved";
};

inline Prediction classify_text(const ModelBundle& bundle, std::string_view text) {
    const TokenSequence tokens = run_pipeline(text, bundle.preprocess);
    return predict(bundle.classifier, transform(tokens, bundle.tfidf));
}

// Full preprocess -> transform -> predict pass over a labeled test set.
inline std::pair<ConfusionMatrix, MetricsReport> evaluate(const ModelBundle& bundle,
                                                          std::span<const LabeledDocument> test) {
    if (test.empty()) throw EmptyMatrix("evaluate: empty test set");
    std::vector<Label> y_true, y_pred;
    y_true.reserve(test.size());
    y_pred.reserve(test.size());
    for (const auto& doc : test) {
        y_true.push_back(doc.label);
        y_pred.push_back(classify_text(bundle, doc.text).label);
    }
    const ConfusionMatrix cm = confusion(y_true, y_pred);
    return {cm, metrics(cm)};
}

}  // namespace senti
