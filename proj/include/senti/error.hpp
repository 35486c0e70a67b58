#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace senti {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoFailure : Error {
    using Error::Error;
};

// CSV structure problems: wrong column count, unbalanced quotes.
struct MalformedRow : Error {
    std::size_t row;
    MalformedRow(std::size_t row_, const std::string& what_)
        : Error("row " + std::to_string(row_) + ": " + what_), row(row_) {}
};

struct UnknownLabel : Error {
    std::string label;
    explicit UnknownLabel(std::string label_, std::size_t row_)
        : Error("row " + std::to_string(row_) + ": unknown sentiment label \"" + label_ + "\""),
          label(std::move(label_)) {}
};

struct InvalidRatio : Error {
    using Error::Error;
};

struct EmptyTrainingSet : Error {
    using Error::Error;
};

// Training objective became NaN/Inf, typically a too-large fixed step.
struct NonFinite : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct TooFewSamples : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct EmptyMatrix : Error {
    using Error::Error;
};

struct VersionMismatch : Error {
    using Error::Error;
};

struct CorruptArtifact : Error {
    using Error::Error;
};

struct SchemaError : Error {
    using Error::Error;
};

struct InvalidRange : Error {
    using Error::Error;
};

}  // namespace senti
