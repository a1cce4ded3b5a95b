#pragma once

#include "groundtrack/evaluation.hpp"
#include "groundtrack/simulator.hpp"
#include "groundtrack/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace groundtrack {

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; blank lines and `#` comments are skipped. Throws Error(parse_error) with
/// the line number on malformed lines and Error(duplicate_entry) on repeated keys.
KeyValues parse_key_values(const std::string& text, const std::string& origin = "<config>");

/// Everything a CLI run needs. Scenario defaults are those of the variant comparison.
struct RunConfig {
    ScenarioConfig scenario = comparison_scenario_config();
    TrackerConfig tracker;
    EvalOptions eval;
    int n_scenarios = 50;
    int runs = 5;
    std::uint64_t seed = 0;
};

/// Applies keys on top of `base`. Ranges are written `lo,hi`; occlusion windows `a-b;c-d`.
/// Unknown keys and malformed values throw Error(parse_error).
RunConfig apply_key_values(const KeyValues& kv, RunConfig base = {});

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Canonical text form of every key; parses back to the same configuration.
std::string to_key_values(const RunConfig& cfg);

}  // namespace groundtrack
