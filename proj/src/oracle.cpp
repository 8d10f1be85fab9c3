#include "ach/oracle.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ach {

namespace {

// Position in the Gray sequence maps to a code whose bit j is entry F-1-j.
// Only codes with entry 0 = +1 are walked; the sign-flipped partner of each
// code has cost M - c because F is odd and margins never vanish.
struct Partial {
    int min_direct = std::numeric_limits<int>::max();
    std::uint64_t count_direct = 0;
    std::uint64_t smallest_direct = 0;
    int min_flipped = std::numeric_limits<int>::max();
    std::uint64_t count_flipped = 0;
    std::uint64_t largest_flipped = 0;

    void observe(int c, int M, std::uint64_t code) {
        if (c < min_direct) {
            min_direct = c;
            count_direct = 1;
            smallest_direct = code;
        } else if (c == min_direct) {
            ++count_direct;
            smallest_direct = std::min(smallest_direct, code);
        }
        const int f = M - c;
        if (f < min_flipped) {
            min_flipped = f;
            count_flipped = 1;
            largest_flipped = code;
        } else if (f == min_flipped) {
            ++count_flipped;
            largest_flipped = std::max(largest_flipped, code);
        }
    }

    void merge(const Partial& o) {
        if (o.min_direct < min_direct) {
            min_direct = o.min_direct;
            count_direct = o.count_direct;
            smallest_direct = o.smallest_direct;
        } else if (o.min_direct == min_direct) {
            count_direct += o.count_direct;
            smallest_direct = std::min(smallest_direct, o.smallest_direct);
        }
        if (o.min_flipped < min_flipped) {
            min_flipped = o.min_flipped;
            count_flipped = o.count_flipped;
            largest_flipped = o.largest_flipped;
        } else if (o.min_flipped == min_flipped) {
            count_flipped += o.count_flipped;
            largest_flipped = std::max(largest_flipped, o.largest_flipped);
        }
    }
};

Partial enumerate_range(const Mapping& m, std::uint64_t begin, std::uint64_t end) {
    const int F = m.input_size();
    const int M = m.pattern_count();
    Partial out;
    if (begin >= end) return out;

    std::uint64_t code = begin ^ (begin >> 1);
    std::vector<int> spin(static_cast<std::size_t>(F));
    for (int k = 0; k < F; ++k) spin[k] = ((code >> (F - 1 - k)) & 1U) ? -1 : 1;
    std::vector<std::int16_t> margin(static_cast<std::size_t>(M));
    int c = 0;
    for (int l = 0; l < M; ++l) {
        const auto col_sum = [&] {
            int h = 0;
            auto s = m.pattern(l);
            for (int k = 0; k < F; ++k) h += spin[k] * s[k];
            return h;
        }();
        margin[l] = static_cast<std::int16_t>(m.target(l) * col_sum);
        c += margin[l] <= 0;
    }
    out.observe(c, M, code);

    for (std::uint64_t g = begin + 1; g < end; ++g) {
        const int bit = std::countr_zero(g);
        const int k = F - 1 - bit;
        const std::int16_t* col = m.aligned_column(k).data();
        c = 0;
        if (spin[k] > 0) {
            for (int l = 0; l < M; ++l) {
                margin[l] = static_cast<std::int16_t>(margin[l] - 2 * col[l]);
                c += margin[l] <= 0;
            }
        } else {
            for (int l = 0; l < M; ++l) {
                margin[l] = static_cast<std::int16_t>(margin[l] + 2 * col[l]);
                c += margin[l] <= 0;
            }
        }
        spin[k] = -spin[k];
        code ^= std::uint64_t{1} << bit;
        out.observe(c, M, code);
    }
    return out;
}

WeightString decode(std::uint64_t code, int F) {
    std::vector<int> spins(static_cast<std::size_t>(F));
    for (int k = 0; k < F; ++k) spins[k] = ((code >> (F - 1 - k)) & 1U) ? -1 : 1;
    return WeightString::from_spins(spins);
}

}  // namespace

OracleResult exhaustive_min_cost(const Mapping& m, int f_limit, int threads) {
    const int F = m.input_size();
    if (f_limit > 62) throw std::invalid_argument("oracle limit cannot exceed 62");
    if (F > f_limit) {
        throw std::invalid_argument("exhaustive search over 2^" + std::to_string(F) +
                                    " strings exceeds the limit F <= " + std::to_string(f_limit) +
                                    "; raise the limit explicitly to proceed");
    }
    const std::uint64_t half = std::uint64_t{1} << (F - 1);
    threads = std::max(1, threads);
    const auto chunks = static_cast<std::uint64_t>(std::min<std::uint64_t>(threads, half));

    std::vector<Partial> parts(chunks);
    const auto bound = [&](std::uint64_t c) { return half / chunks * c + std::min(c, half % chunks); };
    if (chunks == 1) {
        parts[0] = enumerate_range(m, 0, half);
    } else {
        std::vector<std::jthread> pool;
        for (std::uint64_t c = 0; c < chunks; ++c) {
            pool.emplace_back([&, c] { parts[c] = enumerate_range(m, bound(c), bound(c + 1)); });
        }
    }
    Partial total;
    for (const auto& p : parts) total.merge(p);

    OracleResult out;
    out.min_cost = std::min(total.min_direct, total.min_flipped);
    if (total.min_direct == out.min_cost) out.minimizer_count += total.count_direct;
    if (total.min_flipped == out.min_cost) out.minimizer_count += total.count_flipped;
    const std::uint64_t all = (half << 1) - 1;
    out.minimizer = total.min_direct == out.min_cost ? decode(total.smallest_direct, F)
                                                     : decode(all ^ total.largest_flipped, F);
    return out;
}

}  // namespace ach
