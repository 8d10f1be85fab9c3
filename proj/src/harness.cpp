#include "ach/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "ach/engine.hpp"
#include "ach/oracle.hpp"
#include "ach/random.hpp"
#include "ach/stats.hpp"

namespace ach {

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::Lattice: return "lattice";
        case TopologyKind::RandomRegular: return "rrg";
        case TopologyKind::Isolated: return "isolated";
    }
    return "lattice";
}

TopologyKind topology_kind_from_string(std::string_view s) {
    if (s == "lattice") return TopologyKind::Lattice;
    if (s == "rrg" || s == "random-regular") return TopologyKind::RandomRegular;
    if (s == "isolated") return TopologyKind::Isolated;
    throw ConfigError("unknown topology kind '" + std::string(s) + "'");
}

void CampaignConfig::validate() const {
    if (input_sizes.empty()) throw ConfigError("at least one input size F is required");
    for (int F : input_sizes) {
        if (F < 1 || F % 2 == 0) throw ConfigError("input sizes must be positive odd integers, got " + std::to_string(F));
    }
    if (runs_per_mapping < 1) throw ConfigError("runs per mapping must be at least 1");
    if (min_realizations < 1) throw ConfigError("realizations must be at least 1");
    if (max_realizations < min_realizations) throw ConfigError("maximum realizations below minimum");
    if (!(target_stderr >= 0.0)) throw ConfigError("target standard error must be non-negative");
    if (pattern_count && *pattern_count < 0) throw ConfigError("pattern count must be non-negative");
    if (!pattern_count && patterns_per_input < 0) throw ConfigError("patterns per input must be non-negative");
    if (max_events < 1) throw ConfigError("max events must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    switch (topology.kind) {
        case TopologyKind::Lattice:
            if (topology.sides.empty()) throw ConfigError("lattice topology needs at least one side L");
            for (int L : topology.sides) {
                if (L < 3) throw ConfigError("lattice side must be at least 3, got " + std::to_string(L));
            }
            break;
        case TopologyKind::RandomRegular:
            if (topology.connectivities.empty()) throw ConfigError("rrg topology needs at least one connectivity C");
            if (topology.graphs_per_point < 1) throw ConfigError("graphs per point must be at least 1");
            for (int C : topology.connectivities) {
                if (C < 1 || C >= topology.nodes || (static_cast<long long>(C) * topology.nodes) % 2 != 0) {
                    throw ConfigError("infeasible random regular graph N=" + std::to_string(topology.nodes) +
                                      ", C=" + std::to_string(C));
                }
            }
            break;
        case TopologyKind::Isolated:
            if (topology.nodes < 1) throw ConfigError("isolated topology needs at least one node");
            break;
    }
    if (mapping_kind == MappingKind::RandomOutput) {
        for (int F : input_sizes) {
            if (F > oracle_limit) {
                throw ConfigError("random mappings need the exhaustive oracle; F=" + std::to_string(F) +
                                  " exceeds the oracle limit " + std::to_string(oracle_limit));
            }
        }
    }
}

std::vector<GridPoint> expand_grid(const CampaignConfig& cfg) {
    std::vector<GridPoint> out;
    const auto& t = cfg.topology;
    auto add_all = [&](int nodes, int parameter) {
        for (int F : cfg.input_sizes) out.push_back({t.kind, nodes, parameter, F, cfg.patterns_for(F)});
    };
    switch (t.kind) {
        case TopologyKind::Lattice:
            for (int L : t.sides) add_all(L * L, L);
            break;
        case TopologyKind::RandomRegular:
            for (int C : t.connectivities) add_all(t.nodes, C);
            break;
        case TopologyKind::Isolated:
            add_all(t.nodes, 0);
            break;
    }
    return out;
}

namespace {

struct MappingOutcome {
    int successes = 0;
    double mean_T = 0.0;
    std::int64_t non_absorbed = 0;
    int visited_minimum = 0;
    double mean_events = 0.0;
    int known_minimum = 0;
    bool disconnected = false;
};

// Seed paths identify a grid point by its parameters, not its position in
// the grid, so adding or removing points leaves the others unchanged.
MappingOutcome run_mapping(const CampaignConfig& cfg, const GridPoint& p, const Graph* shared_graph,
                           std::uint64_t index) {
    const auto kind = static_cast<std::uint64_t>(p.topology);
    const auto N = static_cast<std::uint64_t>(p.nodes);
    const auto param = static_cast<std::uint64_t>(p.parameter);
    const auto F = static_cast<std::uint64_t>(p.F);
    const auto M = static_cast<std::uint64_t>(p.M);

    Rng mapping_rng = derive_rng(cfg.seed, Stream::Mapping, {kind, N, param, F, M, index});
    const Mapping mapping = cfg.mapping_kind == MappingKind::TeacherSeparable
                                ? generate_teacher_mapping(p.F, p.M, mapping_rng)
                                : generate_random_mapping(p.F, p.M, mapping_rng);

    std::optional<Graph> own_graph;
    if (!shared_graph) {
        const auto g = index % static_cast<std::uint64_t>(cfg.topology.graphs_per_point);
        Rng graph_rng = derive_rng(cfg.seed, Stream::Graph, {N, param, g});
        own_graph = random_regular_graph(p.nodes, p.parameter, graph_rng, g);
        shared_graph = &*own_graph;
    }

    MappingOutcome out;
    out.known_minimum =
        cfg.mapping_kind == MappingKind::TeacherSeparable ? 0 : exhaustive_min_cost(mapping, cfg.oracle_limit).min_cost;
    out.disconnected = !shared_graph->is_connected();

    RunOptions options;
    options.max_events = cfg.max_events;
    double total_T = 0.0;
    double total_events = 0.0;
    for (int r = 0; r < cfg.runs_per_mapping; ++r) {
        Rng run_rng = derive_rng(cfg.seed, Stream::Run, {kind, N, param, F, M, index, static_cast<std::uint64_t>(r)});
        const RunResult res = run_to_absorption(*shared_graph, mapping, out.known_minimum, run_rng, options);
        out.successes += res.success ? 1 : 0;
        out.non_absorbed += res.absorbed ? 0 : 1;
        out.visited_minimum += res.visited_minimum ? 1 : 0;
        total_T += res.relaxation_time;
        total_events += static_cast<double>(res.event_count);
    }
    out.mean_T = total_T / cfg.runs_per_mapping;
    out.mean_events = total_events / cfg.runs_per_mapping;
    return out;
}

template <class Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
    const int count = end - begin;
    if (count <= 0) return;
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<int> next{begin};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (int i = next++; i < end; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = end;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

PointResult run_point(const CampaignConfig& cfg, const GridPoint& p, const CampaignHooks& hooks) {
    std::optional<Graph> shared;
    if (p.topology == TopologyKind::Lattice) shared = square_lattice(p.parameter);
    if (p.topology == TopologyKind::Isolated) shared = empty_graph(p.nodes);
    const Graph* graph = shared ? &*shared : nullptr;

    std::vector<MappingOutcome> outcomes;
    std::vector<double> fractions;
    int done = 0;
    int batch = cfg.min_realizations;
    while (true) {
        const int end = std::min(cfg.max_realizations, done + batch);
        outcomes.resize(static_cast<std::size_t>(end));
        parallel_for(done, end, cfg.threads, [&](int i) {
            outcomes[i] = run_mapping(cfg, p, graph, static_cast<std::uint64_t>(i));
        });
        for (int i = done; i < end; ++i) {
            fractions.push_back(static_cast<double>(outcomes[i].successes) / cfg.runs_per_mapping);
        }
        done = end;
        const MeanEstimate est = estimate_pm(fractions);
        if (hooks.progress) {
            hooks.progress(std::string(to_string(p.topology)) + " N=" + std::to_string(p.nodes) +
                           " param=" + std::to_string(p.parameter) + " F=" + std::to_string(p.F) +
                           ": " + std::to_string(done) + " mappings, P_m=" + std::to_string(est.mean));
        }
        if (done >= cfg.max_realizations) break;
        if (std::isfinite(est.std_error) && est.std_error <= cfg.target_stderr) break;
        if (hooks.cancel && hooks.cancel->load()) {
            throw std::runtime_error("campaign cancelled");
        }
        batch = std::max(1, done / 2);
    }

    PointResult out;
    out.point = p;
    out.mapping_kind = cfg.mapping_kind;
    out.realizations = done;
    out.runs_per_mapping = cfg.runs_per_mapping;
    const MeanEstimate pm = estimate_pm(fractions);
    out.pm = pm.mean;
    out.pm_stderr = pm.std_error;

    std::vector<double> t_over_n;
    double total_T = 0.0;
    double visited = 0.0;
    double events = 0.0;
    double known = 0.0;
    for (const auto& o : outcomes) {
        total_T += o.mean_T;
        t_over_n.push_back(o.mean_T / p.nodes);
        out.non_absorbed += o.non_absorbed;
        out.disconnected_graphs += o.disconnected ? 1 : 0;
        visited += o.visited_minimum;
        events += o.mean_events;
        known += o.known_minimum;
    }
    const MeanEstimate t = mean_and_stderr(t_over_n);
    out.mean_T = total_T / done;
    out.mean_T_over_N = t.mean;
    out.t_stderr = t.std_error;
    out.visited_minimum_fraction = visited / (static_cast<double>(done) * cfg.runs_per_mapping);
    out.mean_events = events / done;
    out.mean_known_minimum = known / done;
    return out;
}

CampaignResult run_campaign(const CampaignConfig& cfg, const CampaignHooks& hooks) {
    cfg.validate();
    CampaignResult result;
    result.config = cfg;
    for (const GridPoint& p : expand_grid(cfg)) {
        if (hooks.skip && hooks.skip(p)) continue;
        if (hooks.cancel && hooks.cancel->load()) {
            result.complete = false;
            break;
        }
        try {
            result.points.push_back(run_point(cfg, p, hooks));
        } catch (const std::runtime_error&) {
            if (hooks.cancel && hooks.cancel->load()) {
                result.complete = false;
                break;
            }
            throw;
        }
        if (hooks.on_point) hooks.on_point(result.points.back());
    }
    return result;
}

}  // namespace ach
