#pragma once

// Run configuration: a YAML document mirroring Scenario plus output
// controls, its canonical JSON echo and the provenance hash.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "wavepilot/core.hpp"

namespace wavepilot {

struct OutputOptions {
    std::string dir{"out"};
    std::vector<std::string> analyses;  // any of: waist, uncertainty, profile, fringes
    std::vector<double> stations;       // z values for profile / fringes
};

// One swept key and the values it takes.
struct SweepAxis {
    std::string key;  // dotted path, e.g. "beam.rays"
    std::vector<YAML::Node> values;
};

struct RunConfig {
    Scenario scenario;
    OutputOptions output;
    std::vector<SweepAxis> sweep;
    nlohmann::json canonical;  // every setting, defaults resolved, sweep excluded
    std::string hash;          // FNV-1a 64 of canonical.dump(), 16 hex digits
};

// Parses and validates a document. Errors are ConfigError messages of the
// form "<source>:<line>: <key>: <reason>".
RunConfig parse_config(const YAML::Node& root, const std::string& source = "config");
RunConfig parse_config_text(const std::string& text, const std::string& source = "config");
RunConfig load_config(const std::string& path);

std::string config_hash(const nlohmann::json& canonical);

// Every combination of the sweep axes applied to `root` (sweep key removed).
std::vector<YAML::Node> expand_sweep(const YAML::Node& root);

// Sets a dotted key in a YAML document, creating intermediate maps.
void set_path(YAML::Node& root, const std::string& dotted, const YAML::Node& value);

}  // namespace wavepilot
