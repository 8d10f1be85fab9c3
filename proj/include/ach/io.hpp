#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ach/harness.hpp"
#include "ach/oracle.hpp"
#include "ach/perceptron.hpp"
#include "ach/stats.hpp"
#include "ach/topology.hpp"

namespace ach {

using json = nlohmann::json;

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);

json to_json(const WeightString& w);
json to_json(const Mapping& m);
Mapping mapping_from_json(const json& j);
json to_json(const Graph& g);
Graph graph_from_json(const json& j);
json to_json(const OracleResult& r);
json to_json(const FitResult& f);
json to_json(const CollapseResult& c);

json to_json(const CampaignConfig& cfg);
// Throws ConfigError on missing or malformed fields.
CampaignConfig config_from_json(const json& j);

// FNV-1a over the compact dump of the config.
std::string config_hash(const CampaignConfig& cfg);

// results.csv columns, in order.
std::span<const char* const> results_columns();
void write_results_csv(std::ostream& out, std::span<const PointResult> points);
std::vector<PointResult> read_results_csv(std::istream& in);
std::vector<PointResult> read_results_csv(const std::filesystem::path& path);

json manifest_json(const CampaignResult& result);

// Writes results.csv, fits.json and manifest.json into dir (created when
// missing). Throws std::runtime_error naming the failing path.
void write_results(const CampaignResult& result, std::span<const FitResult> fits,
                   const std::filesystem::path& dir);

// All tagged fits that the points support.
std::vector<FitResult> all_fits(std::span<const PointResult> points);

}  // namespace ach
