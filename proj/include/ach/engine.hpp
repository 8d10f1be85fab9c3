#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ach/perceptron.hpp"
#include "ach/random.hpp"
#include "ach/topology.hpp"

namespace ach {

struct EventRecord {
    int target = -1;
    int neighbor = -1;
    bool interacted = false;
    std::optional<int> flipped_index;
    double time_increment = 0.0;
};

// Agent states for one ACH run. Holds references to the graph and mapping,
// which must outlive it.
//
// Per agent: packed weight string, margins t^l h^l (int16, one per pattern),
// cached cost, and the number of neighbors whose string differs. An agent is
// active iff that count is positive; the active agents are kept in a dense
// list with a position index for O(1) insert and erase.
class Population {
public:
    // iid uniform initial strings, agent 0 first.
    Population(const Graph& graph, const Mapping& mapping, Rng& rng);
    // Explicit initial strings, one per node.
    Population(const Graph& graph, const Mapping& mapping, std::span<const WeightString> initial);

    int size() const { return n_; }
    int input_size() const { return F_; }
    const Graph& graph() const { return *graph_; }
    const Mapping& mapping() const { return *mapping_; }

    WeightString string(int i) const;
    int cost(int i) const { return cost_[i]; }
    bool is_active(int i) const { return active_pos_[i] >= 0; }
    std::span<const int> active_agents() const { return active_; }
    bool absorbed() const { return active_.empty(); }
    int hamming(int i, int j) const;

    // t^l h^l for agent i.
    std::span<const std::int16_t> margins(int i) const {
        return {margins_.data() + static_cast<std::size_t>(i) * M_, static_cast<std::size_t>(M_)};
    }

    // Accumulated time in whole-population pick attempts, and events taken.
    double clock() const { return clock_; }
    std::int64_t events() const { return events_; }

    // One active-list event. The clock advances by n / |active| before the
    // event is applied. Throws std::logic_error on an absorbed population.
    EventRecord step(Rng& rng);

    // Flips entry k of agent i and refreshes fields, cost and activity.
    void flip(int i, int k);

    bool is_homogeneous() const;

private:
    void build(std::span<const WeightString> initial);
    const std::uint64_t* words(int i) const { return bits_.data() + static_cast<std::size_t>(i) * W_; }
    std::uint64_t* words(int i) { return bits_.data() + static_cast<std::size_t>(i) * W_; }
    bool differs(int i, int j) const;
    void set_active(int i, bool active);
    int recount(int i, int k, bool was_negative);

    const Graph* graph_;
    const Mapping* mapping_;
    int n_ = 0;
    int F_ = 0;
    int M_ = 0;
    int W_ = 0;
    std::vector<std::uint64_t> bits_;
    std::vector<std::int16_t> margins_;
    std::vector<int> cost_;
    std::vector<int> differing_;
    std::vector<int> active_;
    std::vector<int> active_pos_;
    std::vector<std::uint64_t> scratch_;
    double clock_ = 0.0;
    std::int64_t events_ = 0;
};

bool is_homogeneous(const Population& pop);

struct RunOptions {
    std::int64_t max_events = 1'000'000'000;
    // CSV event trace: event_index,target,neighbor,interacted,flipped_index,clock
    std::ostream* trace = nullptr;
};

struct RunResult {
    // On disconnected graphs each component absorbs separately; the reported
    // string is the costliest final string (lowest agent index on ties) and
    // success requires every agent to hold a minimum-cost string.
    WeightString final_string;
    int final_cost = 0;
    bool success = false;
    bool absorbed = false;
    double relaxation_time = 0.0;
    std::int64_t event_count = 0;
    // Diagnostic only: some agent held a minimum-cost string at some point.
    bool visited_minimum = false;
};

RunResult run_to_absorption(const Graph& graph, const Mapping& mapping, int known_minimum, Rng& rng,
                            const RunOptions& options = {});

// Runs an already initialised population to absorption.
RunResult run_to_absorption(Population& pop, int known_minimum, Rng& rng,
                            const RunOptions& options = {});

}  // namespace ach
