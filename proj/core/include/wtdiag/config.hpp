#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/detector.hpp"
#include "wtdiag/kvmap.hpp"
#include "wtdiag/pipeline.hpp"
#include "wtdiag/tiler.hpp"

namespace wtdiag {

// One JSON file configures a whole run. Every section and field is optional;
// unknown keys are rejected. Relative paths resolve against the config file's
// directory. API keys come only from the environment variable named by each
// stage's "api_key_env" (default WTDIAG_API_KEY).
struct PipelineConfig {
  TilingConfig tiling;
  KvConfig kv;
  ProviderConfig detector;
  StageConfig stages;
  std::optional<std::filesystem::path> keywords;     // default table if unset
  std::optional<std::filesystem::path> prompts_dir;  // compiled-in if unset
  std::optional<std::filesystem::path> input_dir;   // used when --in is absent
  std::filesystem::path output_dir = "out";
  int parallelism = 1;

  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Throws ConfigError for malformed JSON, unknown keys, wrong types and
// invalid values.
PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::filesystem::path& base_dir = {},
                                     const EnvLookup& env = process_env());
PipelineConfig load_pipeline_config(const std::filesystem::path& path,
                                    const EnvLookup& env = process_env());

// Secrets are omitted.
void to_json(nlohmann::json& j, const PipelineConfig& c);

}  // namespace wtdiag
