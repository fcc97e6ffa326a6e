#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "r2vf/serialize.hpp"

namespace r2vf {

/// Everything needed to re-run a CLI invocation: the subcommand, its resolved
/// settings and config (defaults materialized), the files it read and wrote,
/// and their SHA-256 checksums.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> args;       // equivalent command line
    Json settings = Json::object();      // subcommand-specific fields
    Json config = Json::object();        // resolved pipeline config, when the command has one
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // role -> path
    std::map<std::string, std::string> outputs;  // role -> path
    std::map<std::string, std::string> checksums;  // path -> hex digest
};

Json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const Json& j);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace r2vf
