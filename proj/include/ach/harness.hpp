#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ach/perceptron.hpp"
#include "ach/topology.hpp"

namespace ach {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class TopologyKind { Lattice, RandomRegular, Isolated };

std::string_view to_string(TopologyKind kind);
TopologyKind topology_kind_from_string(std::string_view s);

struct TopologySpec {
    TopologyKind kind = TopologyKind::Lattice;
    std::vector<int> sides;           // lattice side lengths L
    int nodes = 100;                  // N for rrg and isolated nodes
    std::vector<int> connectivities;  // C values for rrg
    int graphs_per_point = 1000;      // rrg pool size, cycled over mappings
};

struct CampaignConfig {
    std::vector<int> input_sizes;
    TopologySpec topology;
    MappingKind mapping_kind = MappingKind::TeacherSeparable;
    int patterns_per_input = 2;        // M = patterns_per_input * F
    std::optional<int> pattern_count;  // fixed M, overrides the ratio
    int runs_per_mapping = 100;
    // Mappings are drawn in batches until the standard error of P_m is at
    // most target_stderr (checked once at least min_realizations are done)
    // or max_realizations is reached.
    int min_realizations = 500;
    int max_realizations = 1'000'000;
    double target_stderr = 0.01;
    std::uint64_t seed = 1;
    std::int64_t max_events = 1'000'000'000;
    int threads = 1;
    int oracle_limit = 25;
    std::string out_dir = "results";

    int patterns_for(int F) const { return pattern_count ? *pattern_count : patterns_per_input * F; }
    void validate() const;  // throws ConfigError
};

// One (topology point, F) cell of the campaign grid.
struct GridPoint {
    TopologyKind topology = TopologyKind::Lattice;
    int nodes = 0;
    int parameter = 0;  // L for lattices, C for rrg, 0 for isolated nodes
    int F = 0;
    int M = 0;
};

std::vector<GridPoint> expand_grid(const CampaignConfig& cfg);

struct PointResult {
    GridPoint point;
    MappingKind mapping_kind = MappingKind::TeacherSeparable;
    int realizations = 0;
    int runs_per_mapping = 0;
    double pm = 0.0;
    double pm_stderr = 0.0;
    double mean_T = 0.0;
    double mean_T_over_N = 0.0;
    double t_stderr = 0.0;  // standard error of T/N between mappings
    std::int64_t non_absorbed = 0;

    // Diagnostics, reported in the manifest only.
    int disconnected_graphs = 0;
    double visited_minimum_fraction = 0.0;
    double mean_events = 0.0;
    double mean_known_minimum = 0.0;
};

struct CampaignResult {
    CampaignConfig config;
    std::vector<PointResult> points;
    bool complete = true;
};

struct CampaignHooks {
    std::function<void(const PointResult&)> on_point;       // after each finished point
    std::function<bool(const GridPoint&)> skip;             // resume support
    std::function<void(const std::string&)> progress;       // side channel
    const std::atomic<bool>* cancel = nullptr;              // checked between batches
};

CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks = {});

// Summary over one grid point, exposed for tests and custom drivers.
PointResult run_point(const CampaignConfig& cfg, const GridPoint& point, const CampaignHooks& hooks = {});

}  // namespace ach
