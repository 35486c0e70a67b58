#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace senti {

// Index-sorted sparse vector: entries hold strictly increasing indices < dim,
// no explicit zeros, all weights finite.
struct SparseVector {
    struct Entry {
        std::uint32_t index;
        double weight;

        bool operator==(const Entry&) const = default;
    };

    std::vector<Entry> entries;
    std::uint32_t dim = 0;

    bool operator==(const SparseVector&) const = default;

    double l2_norm() const {
        double sq = 0.0;
        for (const auto& e : entries) sq += e.weight * e.weight;
        return std::sqrt(sq);
    }

    // Normalizes in place; a zero vector stays zero.
    void l2_normalize() {
        const double norm = l2_norm();
        if (norm == 0.0) return;
        for (auto& e : entries) e.weight /= norm;
    }
};

// Dot product against one row of a dense class-by-feature matrix.
inline double dot(const SparseVector& x, std::span<const double> dense_row) {
    double acc = 0.0;
    for (const auto& e : x.entries) acc += e.weight * dense_row[e.index];
    return acc;
}

}  // namespace senti
