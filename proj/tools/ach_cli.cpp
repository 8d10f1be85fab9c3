// ach: batch experiments for the adaptive culture heuristic on binary
// perceptrons.
//
//   ach campaign --config cfg.json
//   ach campaign --f-list 11,21,31 --topology lattice --l-list 10,20 --runs 100 --realizations 500
//   ach oracle --f 15 --seed 3
//   ach fit --input results/results.csv --model pm_vs_f
//   ach collapse --input results/results.csv
//   ach run --f 21 --l 10 --seed 5 --trace events.csv
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include <CLI11.hpp>

#include "ach/engine.hpp"
#include "ach/harness.hpp"
#include "ach/io.hpp"
#include "ach/oracle.hpp"
#include "ach/stats.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct CampaignArgs {
    std::string config_path;
    std::vector<int> f_list;
    std::string topology;
    std::vector<int> l_list;
    std::vector<int> c_list;
    int nodes = 0;
    int graphs_per_point = 0;
    std::string mapping;
    int runs = 0;
    int realizations = 0;
    int max_realizations = 0;
    double target_stderr = -1.0;
    long long seed = -1;
    std::string out_dir;
    long long max_events = 0;
    int threads = 0;
    int patterns = -1;
    bool resume = false;
    bool quiet = false;
};

ach::CampaignConfig build_config(const CampaignArgs& a) {
    ach::json j = ach::json::object();
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw ach::ConfigError("cannot open config " + a.config_path);
        try {
            j = ach::json::parse(in);
        } catch (const ach::json::exception& e) {
            throw ach::ConfigError("config " + a.config_path + ": " + e.what());
        }
    }
    if (!j.contains("topology")) j["topology"] = ach::json::object();
    auto& t = j["topology"];
    if (!a.f_list.empty()) j["input_sizes"] = a.f_list;
    if (!a.topology.empty()) t["kind"] = a.topology;
    if (!a.l_list.empty()) t["sides"] = a.l_list;
    if (!a.c_list.empty()) t["connectivities"] = a.c_list;
    if (a.nodes > 0) t["nodes"] = a.nodes;
    if (a.graphs_per_point > 0) t["graphs_per_point"] = a.graphs_per_point;
    if (!a.mapping.empty()) j["mapping"] = a.mapping;
    if (a.runs > 0) j["runs_per_mapping"] = a.runs;
    if (a.realizations > 0 || a.max_realizations > 0 || a.target_stderr >= 0.0) {
        if (!j.contains("realizations") || j["realizations"].is_number()) {
            const int fixed = j.contains("realizations") ? j["realizations"].get<int>() : 0;
            j["realizations"] = ach::json::object();
            if (fixed > 0) j["realizations"] = {{"min", fixed}, {"max", fixed}};
        }
        auto& r = j["realizations"];
        if (a.realizations > 0) {
            r["min"] = a.realizations;
            if (a.max_realizations == 0 && a.target_stderr < 0.0) r["max"] = a.realizations;
        }
        if (a.max_realizations > 0) r["max"] = a.max_realizations;
        if (a.target_stderr >= 0.0) r["target_stderr"] = a.target_stderr;
    }
    if (a.seed >= 0) j["seed"] = static_cast<std::uint64_t>(a.seed);
    if (!a.out_dir.empty()) j["out_dir"] = a.out_dir;
    if (a.max_events > 0) j["max_events"] = a.max_events;
    if (a.threads > 0) j["threads"] = a.threads;
    if (a.patterns >= 0) j["pattern_count"] = a.patterns;
    return ach::config_from_json(j);
}

using PointKey = std::tuple<int, int, int, int, int>;

PointKey key_of(const ach::GridPoint& p) {
    return {static_cast<int>(p.topology), p.nodes, p.parameter, p.F, p.M};
}

int run_campaign_command(const CampaignArgs& args) {
    const ach::CampaignConfig cfg = build_config(args);
    const std::filesystem::path dir = cfg.out_dir;

    ach::CampaignResult accumulated;
    accumulated.config = cfg;
    std::set<PointKey> finished;
    if (args.resume && std::filesystem::exists(dir / "results.csv")) {
        std::ifstream mf(dir / "manifest.json");
        if (mf) {
            const auto manifest = ach::json::parse(mf);
            if (manifest.value("config_hash", "") != ach::config_hash(cfg)) {
                throw ach::ConfigError("cannot resume: " + (dir / "manifest.json").string() +
                                       " was written for a different configuration");
            }
        }
        for (auto& p : ach::read_results_csv(dir / "results.csv")) {
            finished.insert(key_of(p.point));
            accumulated.points.push_back(p);
        }
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    auto flush = [&](bool complete) {
        accumulated.complete = complete;
        const auto fits = ach::all_fits(accumulated.points);
        ach::write_results(accumulated, fits, dir);
    };

    ach::CampaignHooks hooks;
    hooks.cancel = &g_interrupted;
    hooks.skip = [&](const ach::GridPoint& p) { return finished.count(key_of(p)) > 0; };
    hooks.on_point = [&](const ach::PointResult& p) {
        accumulated.points.push_back(p);
        flush(false);
    };
    if (!args.quiet) hooks.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };

    const ach::CampaignResult result = ach::run_campaign(cfg, hooks);
    flush(result.complete);
    if (!result.complete) {
        std::cerr << "interrupted; partial results in " << dir.string() << " (rerun with --resume)\n";
        return kExitRuntime;
    }
    if (!args.quiet) std::cerr << "wrote " << (dir / "results.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive culture heuristic experiments for Boolean binary perceptrons"};
    app.require_subcommand(1);

    CampaignArgs ca;
    auto* campaign = app.add_subcommand("campaign", "Run a Monte Carlo campaign and write results.csv, fits.json, manifest.json");
    campaign->add_option("--config", ca.config_path, "JSON campaign config; other flags override it");
    campaign->add_option("--f-list", ca.f_list, "Input sizes F (odd)")->delimiter(',');
    campaign->add_option("--topology", ca.topology, "lattice | rrg | isolated");
    campaign->add_option("--l-list", ca.l_list, "Lattice sides L")->delimiter(',');
    campaign->add_option("--c-list", ca.c_list, "Random regular connectivities C")->delimiter(',');
    campaign->add_option("--n", ca.nodes, "Node count for rrg or isolated topologies");
    campaign->add_option("--graphs-per-point", ca.graphs_per_point, "Distinct random graphs per grid point");
    campaign->add_option("--mapping", ca.mapping, "teacher | random");
    campaign->add_option("--runs", ca.runs, "Runs per mapping (default 100)");
    campaign->add_option("--realizations", ca.realizations, "Mapping realizations (minimum when adaptive)");
    campaign->add_option("--max-realizations", ca.max_realizations, "Cap for adaptive realization counts");
    campaign->add_option("--target-stderr", ca.target_stderr, "Stop adding mappings once stderr(P_m) is below this");
    campaign->add_option("--patterns", ca.patterns, "Fixed pattern count M (default M = 2F)");
    campaign->add_option("--seed", ca.seed, "Master seed");
    campaign->add_option("--out-dir", ca.out_dir, "Output directory");
    campaign->add_option("--max-events", ca.max_events, "Per-run event cap");
    campaign->add_option("--threads", ca.threads, "Worker threads");
    campaign->add_flag("--resume", ca.resume, "Skip grid points already present in the output directory");
    campaign->add_flag("--quiet", ca.quiet, "No progress output");

    int oracle_f = 0;
    int oracle_m = -1;
    std::uint64_t oracle_seed = 1;
    std::string oracle_mapping = "random";
    int oracle_limit = ach::kDefaultOracleLimit;
    int oracle_threads = 1;
    std::string oracle_mapping_out;
    auto* oracle = app.add_subcommand("oracle", "Exhaustive minimum cost of a generated mapping (JSON on stdout)");
    oracle->add_option("--f", oracle_f, "Input size F (odd)")->required();
    oracle->add_option("--m", oracle_m, "Pattern count M (default 2F)");
    oracle->add_option("--seed", oracle_seed, "Mapping seed");
    oracle->add_option("--mapping", oracle_mapping, "random | teacher");
    oracle->add_option("--limit", oracle_limit, "Largest F the search accepts");
    oracle->add_option("--threads", oracle_threads, "Worker threads");
    oracle->add_option("--mapping-out", oracle_mapping_out, "Also write the mapping as JSON here");

    std::string fit_input;
    std::string fit_model;
    auto* fit = app.add_subcommand("fit", "Fit a scaling model to results.csv (JSON on stdout)");
    fit->add_option("--input", fit_input, "results.csv")->required();
    fit->add_option("--model", fit_model, "one_minus_pm_vs_n4root | pm_vs_f | t_over_n_vs_f2")->required();

    std::string collapse_input;
    int collapse_min_n = 900;
    auto* collapse = app.add_subcommand("collapse", "Scaling-collapse table u = F/N^(1/4) (JSON on stdout)");
    collapse->add_option("--input", collapse_input, "results.csv")->required();
    collapse->add_option("--min-n", collapse_min_n, "Smallest N entering the quality metric");

    int run_f = 0;
    int run_m = -1;
    int run_l = 0;
    int run_n = 100;
    int run_c = 0;
    std::uint64_t run_seed = 1;
    std::string run_mapping = "teacher";
    std::string run_trace;
    std::string run_graph_out;
    auto* run = app.add_subcommand("run", "One run to absorption (JSON on stdout)");
    run->add_option("--f", run_f, "Input size F (odd)")->required();
    run->add_option("--m", run_m, "Pattern count M (default 2F)");
    run->add_option("--l", run_l, "Lattice side L");
    run->add_option("--n", run_n, "Node count for a random regular graph");
    run->add_option("--c", run_c, "Random regular connectivity C (used when --l is absent)");
    run->add_option("--seed", run_seed, "Seed for mapping, graph and dynamics");
    run->add_option("--mapping", run_mapping, "teacher | random");
    run->add_option("--trace", run_trace, "Write the CSV event trace here");
    run->add_option("--graph-out", run_graph_out, "Write the graph as JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*campaign) return run_campaign_command(ca);

        if (*oracle) {
            const int M = oracle_m >= 0 ? oracle_m : 2 * oracle_f;
            ach::Rng rng(oracle_seed);
            const auto kind = ach::mapping_kind_from_string(oracle_mapping);
            const ach::Mapping m = kind == ach::MappingKind::TeacherSeparable
                                       ? ach::generate_teacher_mapping(oracle_f, M, rng, oracle_seed)
                                       : ach::generate_random_mapping(oracle_f, M, rng, oracle_seed);
            if (!oracle_mapping_out.empty()) {
                std::ofstream out(oracle_mapping_out);
                if (!out) throw std::runtime_error("cannot write " + oracle_mapping_out);
                out << ach::to_json(m).dump() << '\n';
            }
            ach::json j = ach::to_json(ach::exhaustive_min_cost(m, oracle_limit, oracle_threads));
            j["F"] = oracle_f;
            j["M"] = M;
            j["seed"] = oracle_seed;
            j["mapping"] = oracle_mapping;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*fit) {
            const auto model = ach::fit_model_from_string(fit_model);
            const auto points = ach::read_results_csv(std::filesystem::path(fit_input));
            ach::json out = ach::json::array();
            for (const auto& f : ach::fit_points(points, model)) out.push_back(ach::to_json(f));
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (*collapse) {
            const auto points = ach::read_results_csv(std::filesystem::path(collapse_input));
            const auto result = ach::scaling_collapse(points, collapse_min_n);
            std::cout << ach::to_json(result).dump(2) << '\n';
            return 0;
        }

        if (*run) {
            const int M = run_m >= 0 ? run_m : 2 * run_f;
            ach::Rng rng(run_seed);
            const auto kind = ach::mapping_kind_from_string(run_mapping);
            const ach::Mapping m = kind == ach::MappingKind::TeacherSeparable
                                       ? ach::generate_teacher_mapping(run_f, M, rng, run_seed)
                                       : ach::generate_random_mapping(run_f, M, rng, run_seed);
            const ach::Graph g = run_l > 0 ? ach::square_lattice(run_l)
                                           : ach::random_regular_graph(run_n, run_c, rng, run_seed);
            const int minimum = kind == ach::MappingKind::TeacherSeparable ? 0 : ach::exhaustive_min_cost(m).min_cost;
            if (!run_graph_out.empty()) {
                std::ofstream out(run_graph_out);
                if (!out) throw std::runtime_error("cannot write " + run_graph_out);
                out << ach::to_json(g).dump() << '\n';
            }
            std::ofstream trace;
            ach::RunOptions options;
            if (!run_trace.empty()) {
                trace.open(run_trace, std::ios::binary);
                if (!trace) throw std::runtime_error("cannot write " + run_trace);
                options.trace = &trace;
            }
            const ach::RunResult r = ach::run_to_absorption(g, m, minimum, rng, options);
            std::cout << ach::json{{"final_string", ach::to_json(r.final_string)},
                                   {"final_cost", r.final_cost},
                                   {"known_minimum", minimum},
                                   {"success", r.success},
                                   {"absorbed", r.absorbed},
                                   {"relaxation_time", r.relaxation_time},
                                   {"relaxation_time_over_n", r.relaxation_time / g.size()},
                                   {"event_count", r.event_count},
                                   {"visited_minimum_diagnostic", r.visited_minimum}}
                             .dump(2)
                      << '\n';
            return 0;
        }
    } catch (const ach::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
