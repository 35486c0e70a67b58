#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace senti {

// std::shuffle and uniform_int_distribution are implementation-defined, so
// seeded results would differ between standard libraries. This Fisher-Yates
// with Lemire-style rejection sampling over mt19937_64 is fully pinned:
// identical seeds give identical permutations everywhere.

inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    // rejection sampling; bound > 0
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded_rand(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace senti
