#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "r2vf/encoding.hpp"
#include "r2vf/glm.hpp"
#include "r2vf/pipeline.hpp"

namespace r2vf {

using Json = nlohmann::json;

// Doubles go through the shortest round-trip formatting of the JSON writer, so
// every document reads back to bit-identical values.

Json to_json(const FeatureSpec& spec);
FeatureSpec spec_from_json(const Json& j);

Json to_json(const BinningScheme& scheme);
BinningScheme scheme_from_json(const Json& j);

Json to_json(const FeatureEncoding& encoding);
FeatureEncoding encoding_from_json(const Json& j);

Json to_json(const FeatureBlock& block);
FeatureBlock block_from_json(const Json& j);

Json to_json(const GlmModel& model);
GlmModel glm_from_json(const Json& j);

Json to_json(const R2vfModel& model);
R2vfModel model_from_json(const Json& j);

/// feature -> [{levels, coefficient}], one entry per cluster in cluster order.
Json to_json(const ClusterMap& clusters);
ClusterMap cluster_map_from_json(const Json& j);

Json to_json(const FitReport& report);
FitReport report_from_json(const Json& j);

Json to_json(const Ranking& ranking);

/// Every field, defaults included.
Json to_json(const R2vfConfig& config);
/// Missing fields keep their defaults; unknown fields are rejected.
R2vfConfig config_from_json(const Json& j);

/// `{"features": [{"name", "kind", "max_bins"?, "min_obs_per_bin"?}]}`. Missing
/// limits come from the config (n or m, and min_obs_per_bin).
std::vector<FeatureSpec> specs_from_json(const Json& j, const R2vfConfig& config);
Json specs_to_json(const std::vector<FeatureSpec>& specs);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace r2vf
