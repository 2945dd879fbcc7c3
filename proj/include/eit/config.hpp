#pragma once

#include <string>

#include "eit/pipeline.hpp"

namespace eit {

/// Parse and validate a pipeline config from JSON; unknown keys are rejected
/// and missing keys take the documented defaults.  Throws ConfigError with a
/// field-level message.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& config);

}  // namespace eit
