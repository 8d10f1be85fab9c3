#include "ach/engine.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ach {

Population::Population(const Graph& graph, const Mapping& mapping, Rng& rng)
    : graph_(&graph), mapping_(&mapping) {
    std::vector<WeightString> initial;
    initial.reserve(static_cast<std::size_t>(graph.size()));
    for (int i = 0; i < graph.size(); ++i) initial.push_back(WeightString::random(mapping.input_size(), rng));
    build(initial);
}

Population::Population(const Graph& graph, const Mapping& mapping, std::span<const WeightString> initial)
    : graph_(&graph), mapping_(&mapping) {
    build(initial);
}

void Population::build(std::span<const WeightString> initial) {
    n_ = graph_->size();
    F_ = mapping_->input_size();
    M_ = mapping_->pattern_count();
    W_ = WeightString::words_for(F_);
    if (initial.size() != static_cast<std::size_t>(n_)) {
        throw std::invalid_argument("need one initial string per node");
    }
    bits_.assign(static_cast<std::size_t>(n_) * W_, 0);
    margins_.assign(static_cast<std::size_t>(n_) * M_, 0);
    cost_.assign(static_cast<std::size_t>(n_), 0);
    differing_.assign(static_cast<std::size_t>(n_), 0);
    active_.clear();
    active_.reserve(static_cast<std::size_t>(n_));
    active_pos_.assign(static_cast<std::size_t>(n_), -1);
    scratch_.assign(static_cast<std::size_t>(W_), 0);
    clock_ = 0.0;
    events_ = 0;

    for (int i = 0; i < n_; ++i) {
        const WeightString& w = initial[i];
        if (w.size() != F_) throw std::invalid_argument("initial string length does not match mapping");
        std::copy(w.words().begin(), w.words().end(), words(i));
        int c = 0;
        std::int16_t* m = margins_.data() + static_cast<std::size_t>(i) * M_;
        for (int l = 0; l < M_; ++l) {
            const auto p = mapping_->packed_pattern(l);
            int mismatches = 0;
            for (int q = 0; q < W_; ++q) mismatches += std::popcount(words(i)[q] ^ p[q]);
            const int h = F_ - 2 * mismatches;
            m[l] = static_cast<std::int16_t>(mapping_->target(l) * h);
            c += m[l] <= 0;
        }
        cost_[i] = c;
    }
    for (int i = 0; i < n_; ++i) {
        int d = 0;
        for (int j : graph_->neighbors_unchecked(i)) d += differs(i, j);
        differing_[i] = d;
        if (d > 0) set_active(i, true);
    }
}

WeightString Population::string(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("agent index out of range");
    WeightString w(F_);
    std::copy(words(i), words(i) + W_, w.mutable_words().begin());
    return w;
}

int Population::hamming(int i, int j) const {
    int d = 0;
    for (int q = 0; q < W_; ++q) d += std::popcount(words(i)[q] ^ words(j)[q]);
    return d;
}

bool Population::differs(int i, int j) const {
    const std::uint64_t* a = words(i);
    const std::uint64_t* b = words(j);
    for (int q = 0; q < W_; ++q) {
        if (a[q] != b[q]) return true;
    }
    return false;
}

void Population::set_active(int i, bool active) {
    const bool now = active_pos_[i] >= 0;
    if (active == now) return;
    if (active) {
        active_pos_[i] = static_cast<int>(active_.size());
        active_.push_back(i);
    } else {
        const int pos = active_pos_[i];
        const int last = active_.back();
        active_[pos] = last;
        active_pos_[last] = pos;
        active_.pop_back();
        active_pos_[i] = -1;
    }
}

int Population::recount(int i, int k, bool was_negative) {
    std::int16_t* m = margins_.data() + static_cast<std::size_t>(i) * M_;
    const std::int16_t* col = mapping_->aligned_column(k).data();
    int c = 0;
    // h^l changes by -2 w_k s_k^l, so t^l h^l changes by -2 w_k (t^l s_k^l).
    if (was_negative) {
        for (int l = 0; l < M_; ++l) {
            m[l] = static_cast<std::int16_t>(m[l] + 2 * col[l]);
            c += m[l] <= 0;
        }
    } else {
        for (int l = 0; l < M_; ++l) {
            m[l] = static_cast<std::int16_t>(m[l] - 2 * col[l]);
            c += m[l] <= 0;
        }
    }
    return c;
}

void Population::flip(int i, int k) {
    if (i < 0 || i >= n_) throw std::out_of_range("agent index out of range");
    if (k < 0 || k >= F_) throw std::out_of_range("flip index out of range");
    const int word = k >> 6;
    const std::uint64_t mask = std::uint64_t{1} << (k & 63);
    std::uint64_t* a = words(i);
    const bool was_negative = (a[word] & mask) != 0;

    int own_delta = 0;
    for (int j : graph_->neighbors_unchecked(i)) {
        const std::uint64_t* b = words(j);
        bool before = false;
        bool after = false;
        for (int q = 0; q < W_; ++q) {
            const std::uint64_t x = a[q] ^ b[q];
            before |= x != 0;
            after |= (q == word ? (x ^ mask) : x) != 0;
        }
        if (before != after) {
            const int d = after ? 1 : -1;
            own_delta += d;
            differing_[j] += d;
            set_active(j, differing_[j] > 0);
        }
    }
    differing_[i] += own_delta;
    set_active(i, differing_[i] > 0);

    a[word] ^= mask;
    cost_[i] = recount(i, k, was_negative);
}

EventRecord Population::step(Rng& rng) {
    if (active_.empty()) throw std::logic_error("step called on an absorbed population");
    EventRecord rec;
    rec.time_increment = static_cast<double>(n_) / static_cast<double>(active_.size());
    clock_ += rec.time_increment;
    ++events_;

    const int target = active_[uniform_index(rng, active_.size())];
    const auto nb = graph_->neighbors_unchecked(target);
    const int neighbor = nb[uniform_index(rng, nb.size())];
    rec.target = target;
    rec.neighbor = neighbor;
    if (cost_[target] < cost_[neighbor]) return rec;

    const std::uint64_t* a = words(target);
    const std::uint64_t* b = words(neighbor);
    int distance = 0;
    for (int q = 0; q < W_; ++q) {
        scratch_[q] = a[q] ^ b[q];
        distance += std::popcount(scratch_[q]);
    }
    if (distance == 0) return rec;

    auto r = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(distance)));
    int k = -1;
    for (int q = 0; q < W_; ++q) {
        std::uint64_t x = scratch_[q];
        const int c = std::popcount(x);
        if (r < c) {
            for (; r > 0; --r) x &= x - 1;
            k = q * 64 + std::countr_zero(x);
            break;
        }
        r -= c;
    }
    flip(target, k);
    rec.interacted = true;
    rec.flipped_index = k;
    return rec;
}

bool Population::is_homogeneous() const {
    for (int i = 0; i < n_; ++i) {
        for (int j : graph_->neighbors_unchecked(i)) {
            if (differs(i, j)) return false;
        }
    }
    return true;
}

bool is_homogeneous(const Population& pop) { return pop.is_homogeneous(); }

RunResult run_to_absorption(const Graph& graph, const Mapping& mapping, int known_minimum, Rng& rng,
                            const RunOptions& options) {
    Population pop(graph, mapping, rng);
    return run_to_absorption(pop, known_minimum, rng, options);
}

RunResult run_to_absorption(Population& pop, int known_minimum, Rng& rng, const RunOptions& options) {
    RunResult out;
    for (int i = 0; i < pop.size() && !out.visited_minimum; ++i) {
        out.visited_minimum = pop.cost(i) == known_minimum;
    }
    std::streamsize old_precision = 0;
    if (options.trace) {
        *options.trace << "event_index,target,neighbor,interacted,flipped_index,clock\n";
        old_precision = options.trace->precision(std::numeric_limits<double>::max_digits10);
    }

    while (!pop.absorbed() && pop.events() < options.max_events) {
        const EventRecord rec = pop.step(rng);
        if (rec.interacted && pop.cost(rec.target) == known_minimum) out.visited_minimum = true;
        if (options.trace) {
            *options.trace << pop.events() - 1 << ',' << rec.target << ',' << rec.neighbor << ','
                           << (rec.interacted ? 1 : 0) << ','
                           << (rec.flipped_index ? std::to_string(*rec.flipped_index) : std::string())
                           << ',' << pop.clock() << '\n';
        }
    }
    if (options.trace) options.trace->precision(old_precision);

    out.absorbed = pop.absorbed();
    out.relaxation_time = pop.clock();
    out.event_count = pop.events();

    int worst = 0;
    bool all_optimal = true;
    for (int i = 0; i < pop.size(); ++i) {
        if (pop.cost(i) < known_minimum) {
            throw std::invalid_argument("agent cost " + std::to_string(pop.cost(i)) +
                                        " is below the stated minimum " + std::to_string(known_minimum));
        }
        if (pop.cost(i) > pop.cost(worst)) worst = i;
        all_optimal = all_optimal && pop.cost(i) == known_minimum;
    }
    out.final_string = pop.string(worst);
    out.final_cost = pop.cost(worst);
    if (cost(out.final_string, pop.mapping()) != out.final_cost) {
        throw std::logic_error("cached cost diverged from direct evaluation");
    }
    if (out.absorbed && !pop.is_homogeneous()) {
        throw std::logic_error("absorbed population is not homogeneous");
    }
    out.success = out.absorbed && all_optimal;
    return out;
}

}  // namespace ach
