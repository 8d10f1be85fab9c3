#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ach {

using Rng = std::mt19937_64;

// Stream tags used when deriving per-item generators from a master seed.
enum class Stream : std::uint32_t {
    Mapping = 1,
    Graph = 2,
    Run = 3,
    Oracle = 4,
};

// Splittable seeding: every generator is seeded through std::seed_seq with
// the words (master_lo, master_hi, stream, path...). Distinct paths give
// distinct seed sequences, so no two work items share a stream.
inline Rng derive_rng(std::uint64_t master, Stream stream,
                      std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(3 + 2 * path.size());
    words.push_back(static_cast<std::uint32_t>(master));
    words.push_back(static_cast<std::uint32_t>(master >> 32));
    words.push_back(static_cast<std::uint32_t>(stream));
    for (std::uint64_t p : path) {
        words.push_back(static_cast<std::uint32_t>(p));
        words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

__extension__ using uint128 = unsigned __int128;

// Uniform integer in [0, bound) via Lemire's multiply-shift with rejection.
// bound must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    std::uint64_t x = rng();
    uint128 m = static_cast<uint128>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            x = rng();
            m = static_cast<uint128>(x) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace ach
