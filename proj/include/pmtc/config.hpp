#pragma once

#include "pmtc/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pmtc {

// Unknown key, malformed value, or a reference to a missing section.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Flat "section.key" -> value text, e.g. "design.p" -> "100,100" or
// "scenario.gy.values" -> "-0.45:0.1:0.05".  Ordered, so the canonical text
// (and its hash) does not depend on how the map was assembled.
using ConfigMap = std::map<std::string, std::string>;

std::vector<std::string> preset_names();
ConfigMap preset(std::string_view name);

// INI ("[section]" headers, "key = value", ';' comments) unless the text
// starts with '{', in which case JSON objects are flattened with '.'.  A run
// manifest is accepted as well; its "config" object is used.
ConfigMap parse_config_text(std::string_view text);
ConfigMap parse_config_file(const std::filesystem::path& path);

// "key=value".  A bare key is looked up in design, run and algorithm, in
// that order.
void apply_override(ConfigMap& config, std::string_view assignment);

// Base of run.preset (if any) with the file's keys on top.
ConfigMap resolve_presets(const ConfigMap& config);

// Throws ConfigError on keys outside the schema or malformed values.
void validate_config(const ConfigMap& config);

struct ExperimentPlan {
    ExperimentSpec spec;
    std::vector<Panel> panels;
    std::map<std::string, std::string> x_names;  // scenario -> swept key
};

ExperimentPlan build_plan(const ConfigMap& config);
// The design in the [design] section alone (no sweep), for `generate`.
Design build_design(const ConfigMap& config);

// One "key=value" line per entry, in key order.
std::string canonical_text(const ConfigMap& config);
std::uint64_t fnv1a64(std::string_view bytes);

// Human-readable listing of every accepted key.
std::string schema_text();

}  // namespace pmtc
