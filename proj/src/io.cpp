#include "ach/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ach/version.hpp"

namespace ach {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("failed to format double");
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return x;
}

namespace {

template <class T>
T parse_integer(std::string_view s) {
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace

json to_json(const WeightString& w) { return w.spins(); }

json to_json(const Mapping& m) {
    json patterns = json::array();
    for (int l = 0; l < m.pattern_count(); ++l) {
        auto row = m.pattern(l);
        patterns.push_back(std::vector<int>(row.begin(), row.end()));
    }
    json j{
        {"F", m.input_size()},
        {"M", m.pattern_count()},
        {"kind", std::string(to_string(m.kind()))},
        {"seed", m.seed() ? json(*m.seed()) : json(nullptr)},
        {"patterns", std::move(patterns)},
        {"targets", std::vector<int>(m.targets().begin(), m.targets().end())},
    };
    if (m.teacher()) j["teacher"] = to_json(*m.teacher());
    return j;
}

Mapping mapping_from_json(const json& j) {
    const int F = j.at("F").get<int>();
    const int M = j.at("M").get<int>();
    SpinMatrix patterns{M, F, {}};
    const auto& rows = j.at("patterns");
    if (rows.size() != static_cast<std::size_t>(M)) throw std::invalid_argument("pattern count does not match M");
    for (const auto& row : rows) {
        if (row.size() != static_cast<std::size_t>(F)) throw std::invalid_argument("pattern length does not match F");
        for (const auto& v : row) patterns.data.push_back(static_cast<Spin>(v.get<int>()));
    }
    std::vector<Spin> targets;
    for (const auto& v : j.at("targets")) targets.push_back(static_cast<Spin>(v.get<int>()));
    std::optional<WeightString> teacher;
    if (j.contains("teacher") && !j.at("teacher").is_null()) {
        teacher = WeightString::from_spins(j.at("teacher").get<std::vector<int>>());
    }
    std::optional<std::uint64_t> seed;
    if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    return Mapping(std::move(patterns), std::move(targets), mapping_kind_from_string(j.at("kind").get<std::string>()),
                   std::move(teacher), seed);
}

json to_json(const Graph& g) {
    json params = json::object();
    params["n"] = g.size();
    if (g.kind() == GraphKind::SquareLattice) params["L"] = g.parameter();
    if (g.kind() == GraphKind::RandomRegular) {
        params["C"] = g.parameter();
        params["seed"] = g.seed() ? json(*g.seed()) : json(nullptr);
        params["connected"] = g.is_connected();
    }
    return json{{"kind", std::string(to_string(g.kind()))}, {"params", params}, {"adjacency", g.adjacency()}};
}

Graph graph_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto& params = j.at("params");
    GraphKind k = GraphKind::Custom;
    int parameter = 0;
    std::optional<std::uint64_t> seed;
    if (kind == "lattice") {
        k = GraphKind::SquareLattice;
        parameter = params.at("L").get<int>();
    } else if (kind == "rrg") {
        k = GraphKind::RandomRegular;
        parameter = params.at("C").get<int>();
        if (params.contains("seed") && !params.at("seed").is_null()) seed = params.at("seed").get<std::uint64_t>();
    }
    return Graph::from_adjacency(j.at("adjacency").get<std::vector<std::vector<int>>>(), k, parameter, seed);
}

json to_json(const OracleResult& r) {
    return json{{"min_cost", r.min_cost}, {"minimizer_count", r.minimizer_count}, {"minimizer", to_json(r.minimizer)}};
}

json to_json(const FitResult& f) {
    return json{
        {"model", f.model ? json(std::string(to_string(*f.model))) : json(nullptr)},
        {"group", f.group},
        {"a", f.a},
        {"b", f.b},
        {"r_squared", f.r_squared},
        {"residual_norm", f.residual_norm},
        {"points", f.points},
    };
}

json to_json(const CollapseResult& c) {
    json rows = json::array();
    for (const auto& r : c.rows) rows.push_back({{"u", r.u}, {"pm", r.pm}, {"N", r.nodes}, {"F", r.F}});
    return json{{"rows", rows}, {"quality", c.quality ? json(*c.quality) : json(nullptr)}};
}

json to_json(const CampaignConfig& cfg) {
    json topo{{"kind", std::string(to_string(cfg.topology.kind))}};
    switch (cfg.topology.kind) {
        case TopologyKind::Lattice: topo["sides"] = cfg.topology.sides; break;
        case TopologyKind::RandomRegular:
            topo["nodes"] = cfg.topology.nodes;
            topo["connectivities"] = cfg.topology.connectivities;
            topo["graphs_per_point"] = cfg.topology.graphs_per_point;
            break;
        case TopologyKind::Isolated: topo["nodes"] = cfg.topology.nodes; break;
    }
    return json{
        {"input_sizes", cfg.input_sizes},
        {"topology", topo},
        {"mapping", std::string(to_string(cfg.mapping_kind))},
        {"patterns_per_input", cfg.patterns_per_input},
        {"pattern_count", cfg.pattern_count ? json(*cfg.pattern_count) : json(nullptr)},
        {"runs_per_mapping", cfg.runs_per_mapping},
        {"realizations",
         {{"min", cfg.min_realizations}, {"max", cfg.max_realizations}, {"target_stderr", cfg.target_stderr}}},
        {"seed", cfg.seed},
        {"max_events", cfg.max_events},
        {"threads", cfg.threads},
        {"oracle_limit", cfg.oracle_limit},
        {"out_dir", cfg.out_dir},
    };
}

CampaignConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    CampaignConfig cfg;
    cfg.input_sizes = get_or(j, "input_sizes", cfg.input_sizes);
    if (j.contains("topology")) {
        const auto& t = j.at("topology");
        cfg.topology.kind = topology_kind_from_string(get_or<std::string>(t, "kind", "lattice"));
        cfg.topology.sides = get_or(t, "sides", cfg.topology.sides);
        cfg.topology.nodes = get_or(t, "nodes", cfg.topology.nodes);
        cfg.topology.connectivities = get_or(t, "connectivities", cfg.topology.connectivities);
        cfg.topology.graphs_per_point = get_or(t, "graphs_per_point", cfg.topology.graphs_per_point);
    }
    try {
        cfg.mapping_kind = mapping_kind_from_string(get_or<std::string>(j, "mapping", "teacher"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.patterns_per_input = get_or(j, "patterns_per_input", cfg.patterns_per_input);
    if (j.contains("pattern_count") && !j.at("pattern_count").is_null()) {
        cfg.pattern_count = get_or(j, "pattern_count", 0);
    }
    cfg.runs_per_mapping = get_or(j, "runs_per_mapping", cfg.runs_per_mapping);
    if (j.contains("realizations")) {
        const auto& r = j.at("realizations");
        if (r.is_number_integer()) {
            cfg.min_realizations = cfg.max_realizations = r.get<int>();
        } else {
            cfg.min_realizations = get_or(r, "min", cfg.min_realizations);
            cfg.max_realizations = get_or(r, "max", cfg.max_realizations);
            cfg.target_stderr = get_or(r, "target_stderr", cfg.target_stderr);
        }
    }
    cfg.seed = get_or(j, "seed", cfg.seed);
    cfg.max_events = get_or(j, "max_events", cfg.max_events);
    cfg.threads = get_or(j, "threads", cfg.threads);
    cfg.oracle_limit = get_or(j, "oracle_limit", cfg.oracle_limit);
    cfg.out_dir = get_or(j, "out_dir", cfg.out_dir);
    cfg.validate();
    return cfg;
}

std::string config_hash(const CampaignConfig& cfg) {
    json j = to_json(cfg);
    // Execution details do not change results.
    j.erase("threads");
    j.erase("out_dir");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

namespace {

constexpr const char* kColumns[] = {
    "topology_kind", "N",      "L_or_C",        "F",        "M",         "mapping_kind", "realizations",
    "runs_per_mapping", "pm", "pm_stderr", "mean_T", "mean_T_over_N", "t_stderr", "non_absorbed",
};

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::span<const char* const> results_columns() { return kColumns; }

void write_results_csv(std::ostream& out, std::span<const PointResult> points) {
    for (std::size_t c = 0; c < std::size(kColumns); ++c) out << (c ? "," : "") << kColumns[c];
    out << '\n';
    for (const auto& p : points) {
        out << to_string(p.point.topology) << ',' << p.point.nodes << ',' << p.point.parameter << ',' << p.point.F
            << ',' << p.point.M << ',' << to_string(p.mapping_kind) << ',' << p.realizations << ','
            << p.runs_per_mapping << ',' << format_double(p.pm) << ',' << format_double(p.pm_stderr) << ','
            << format_double(p.mean_T) << ',' << format_double(p.mean_T_over_N) << ','
            << format_double(p.t_stderr) << ',' << p.non_absorbed << '\n';
    }
}

std::vector<PointResult> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("results CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() != std::size(kColumns)) throw std::invalid_argument("unexpected results CSV header");
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] != kColumns[c]) throw std::invalid_argument("unexpected results CSV column '" + std::string(header[c]) + "'");
    }
    std::vector<PointResult> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != std::size(kColumns)) {
            throw std::invalid_argument("results CSV line " + std::to_string(line_no) + " has the wrong field count");
        }
        PointResult p;
        p.point.topology = topology_kind_from_string(f[0]);
        p.point.nodes = parse_integer<int>(f[1]);
        p.point.parameter = parse_integer<int>(f[2]);
        p.point.F = parse_integer<int>(f[3]);
        p.point.M = parse_integer<int>(f[4]);
        p.mapping_kind = mapping_kind_from_string(f[5]);
        p.realizations = parse_integer<int>(f[6]);
        p.runs_per_mapping = parse_integer<int>(f[7]);
        p.pm = parse_double(f[8]);
        p.pm_stderr = parse_double(f[9]);
        p.mean_T = parse_double(f[10]);
        p.mean_T_over_N = parse_double(f[11]);
        p.t_stderr = parse_double(f[12]);
        p.non_absorbed = parse_integer<std::int64_t>(f[13]);
        out.push_back(p);
    }
    return out;
}

std::vector<PointResult> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return read_results_csv(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

json manifest_json(const CampaignResult& result) {
    json points = json::array();
    for (const auto& p : result.points) {
        points.push_back({
            {"topology_kind", std::string(to_string(p.point.topology))},
            {"N", p.point.nodes},
            {"L_or_C", p.point.parameter},
            {"F", p.point.F},
            {"M", p.point.M},
            {"realizations", p.realizations},
            {"disconnected_graphs", p.disconnected_graphs},
            {"mean_events", p.mean_events},
            {"mean_known_minimum", p.mean_known_minimum},
            {"visited_minimum_fraction_diagnostic", p.visited_minimum_fraction},
        });
    }
    return json{
        {"library", "ach"},
        {"version", kVersion},
        {"status", result.complete ? "complete" : "interrupted"},
        {"config", to_json(result.config)},
        {"config_hash", config_hash(result.config)},
        {"master_seed", result.config.seed},
        {"rng", "std::mt19937_64"},
        {"seed_derivation",
         "std::seed_seq over 32-bit words (seed_lo, seed_hi, stream, then each path value as lo, hi); "
         "streams: mapping=1 path (topology, N, L_or_C, F, M, mapping_index); graph=2 path (N, C, graph_index); "
         "run=3 path (topology, N, L_or_C, F, M, mapping_index, run_index)"},
        {"time_unit", "whole-population pick attempts; each active-list event adds N/|active|"},
        {"completed_points", points},
    };
}

void write_results(const CampaignResult& result, std::span<const FitResult> fits, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    auto open = [](const std::filesystem::path& p) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        return out;
    };
    auto finish = [](std::ofstream& out, const std::filesystem::path& p) {
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + p.string());
    };

    const auto csv_path = dir / "results.csv";
    auto csv = open(csv_path);
    write_results_csv(csv, result.points);
    finish(csv, csv_path);

    json fit_array = json::array();
    for (const auto& f : fits) fit_array.push_back(to_json(f));
    const auto fits_path = dir / "fits.json";
    auto fits_out = open(fits_path);
    fits_out << fit_array.dump(2) << '\n';
    finish(fits_out, fits_path);

    const auto manifest_path = dir / "manifest.json";
    auto manifest = open(manifest_path);
    manifest << manifest_json(result).dump(2) << '\n';
    finish(manifest, manifest_path);
}

std::vector<FitResult> all_fits(std::span<const PointResult> points) {
    std::vector<FitResult> out;
    for (FitModel m : {FitModel::OneMinusPmVsN4Root, FitModel::PmVsF, FitModel::TOverNVsF2}) {
        auto f = fit_points(points, m);
        out.insert(out.end(), f.begin(), f.end());
    }
    return out;
}

}  // namespace ach
