#pragma once

#include <cstdint>

#include "ach/perceptron.hpp"

namespace ach {

inline constexpr int kDefaultOracleLimit = 25;

struct OracleResult {
    int min_cost = 0;
    std::uint64_t minimizer_count = 0;
    // Lexicographically smallest minimizer: entry 0 most significant, with
    // +1 encoded as 0 and -1 as 1.
    WeightString minimizer;
};

// Exact minimum of the cost over all 2^F weight strings. Rejects F above
// f_limit (hard ceiling 62). The enumeration may be split over threads; the
// result does not depend on the thread count.
OracleResult exhaustive_min_cost(const Mapping& m, int f_limit = kDefaultOracleLimit, int threads = 1);

}  // namespace ach
