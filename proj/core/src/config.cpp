#include "wtdiag/config.hpp"

#include <cstdlib>
#include <initializer_list>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/image.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wtdiag {
namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_tiling(const json& j, TilingConfig& t) {
  const std::string w = "tiling";
  reject_unknown(j, w, {"base_width", "base_height", "scale_factor", "scale_count",
                        "overlap_ratio", "min_visibility", "edge_clamp"});
  read(j, "base_width", t.base_width, w);
  read(j, "base_height", t.base_height, w);
  read(j, "scale_factor", t.scale_factor, w);
  read(j, "scale_count", t.scale_count, w);
  read(j, "overlap_ratio", t.overlap_ratio, w);
  read(j, "min_visibility", t.min_visibility, w);
  read(j, "edge_clamp", t.edge_clamp, w);
}

void read_kv(const json& j, KvConfig& kv) {
  const std::string w = "kv";
  reject_unknown(j, w, {"area_threshold_fraction", "quantifier_thresholds"});
  read(j, "area_threshold_fraction", kv.area_threshold_fraction, w);
  if (j.contains("quantifier_thresholds")) {
    std::vector<double> t;
    read(j, "quantifier_thresholds", t, w);
    if (t.size() != kv.quantifier_thresholds.size()) {
      throw ConfigError("kv.quantifier_thresholds needs exactly 4 values");
    }
    std::copy(t.begin(), t.end(), kv.quantifier_thresholds.begin());
  }
}

void read_detector(const json& j, ProviderConfig& d, const fs::path& base) {
  const std::string w = "detector";
  reject_unknown(j, w, {"kind", "location", "confidence_floor", "noise_seed",
                        "drop_rate", "jitter_px", "max_in_flight", "timeout_ms"});
  if (j.contains("kind")) {
    std::string kind;
    read(j, "kind", kind, w);
    d.kind = provider_kind_from_string(kind);
  }
  read(j, "location", d.location, w);
  if (d.kind == ProviderKind::kFile && !d.location.empty()) {
    d.location = resolve(base, d.location).string();
  }
  read(j, "confidence_floor", d.confidence_floor, w);
  read(j, "noise_seed", d.noise_seed, w);
  read(j, "drop_rate", d.drop_rate, w);
  read(j, "jitter_px", d.jitter_px, w);
  read(j, "max_in_flight", d.max_in_flight, w);
  read(j, "timeout_ms", d.timeout_ms, w);
}

void read_chat(const json& j, ChatRequest& r, const std::string& w,
               const EnvLookup& env) {
  reject_unknown(j, w, {"endpoint", "model", "temperature", "max_tokens", "timeout_ms",
                        "max_retries", "backoff_ms", "image_style", "api_key_env"});
  read(j, "endpoint", r.endpoint, w);
  read(j, "model", r.model, w);
  read(j, "temperature", r.temperature, w);
  read(j, "max_tokens", r.max_tokens, w);
  read(j, "max_retries", r.max_retries, w);
  if (j.contains("timeout_ms")) {
    long long ms = 0;
    read(j, "timeout_ms", ms, w);
    r.timeout = std::chrono::milliseconds(ms);
  }
  if (j.contains("backoff_ms")) {
    long long ms = 0;
    read(j, "backoff_ms", ms, w);
    r.backoff = std::chrono::milliseconds(ms);
  }
  if (j.contains("image_style")) {
    std::string style;
    read(j, "image_style", style, w);
    if (style == "image_url") {
      r.image_style = ImagePartStyle::kImageUrl;
    } else if (style == "base64_source") {
      r.image_style = ImagePartStyle::kBase64Source;
    } else {
      throw ConfigError(w + ".image_style must be image_url or base64_source");
    }
  }
  std::string key_env = "WTDIAG_API_KEY";
  read(j, "api_key_env", key_env, w);
  if (auto key = env(key_env)) r.api_key = *key;
}

void read_stages(const json& j, StageConfig& s, const EnvLookup& env) {
  const std::string w = "stages";
  reject_unknown(j, w, {"enable_detector", "enable_stage1", "enable_stage2", "stage1",
                        "stage2"});
  read(j, "enable_detector", s.toggles.enable_detector, w);
  read(j, "enable_stage1", s.toggles.enable_stage1, w);
  read(j, "enable_stage2", s.toggles.enable_stage2, w);
  if (j.contains("stage1")) read_chat(j["stage1"], s.stage1, "stages.stage1", env);
  if (j.contains("stage2")) read_chat(j["stage2"], s.stage2, "stages.stage2", env);
}

json chat_json(const ChatRequest& r) {
  return {{"endpoint", r.endpoint},
          {"model", r.model},
          {"temperature", r.temperature},
          {"max_tokens", r.max_tokens},
          {"timeout_ms", r.timeout.count()},
          {"max_retries", r.max_retries},
          {"backoff_ms", r.backoff.count()},
          {"image_style",
           r.image_style == ImagePartStyle::kImageUrl ? "image_url" : "base64_source"}};
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    tiling.validate();
    kv.validate();
    detector.validate();
    stages.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

PipelineConfig parse_pipeline_config(std::string_view json_text, const fs::path& base_dir,
                                     const EnvLookup& env) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config", {"tiling", "kv", "detector", "stages", "keywords",
                               "prompts_dir", "input_dir", "output_dir",
                               "parallelism"});
  PipelineConfig c;
  if (j.contains("tiling")) read_tiling(j["tiling"], c.tiling);
  if (j.contains("kv")) read_kv(j["kv"], c.kv);
  if (j.contains("detector")) read_detector(j["detector"], c.detector, base_dir);
  if (j.contains("stages")) read_stages(j["stages"], c.stages, env);
  // Stage keys apply even when the stages section is absent.
  if (!j.contains("stages")) {
    read_chat(json::object(), c.stages.stage1, "stages.stage1", env);
    read_chat(json::object(), c.stages.stage2, "stages.stage2", env);
  }
  if (j.contains("keywords")) {
    std::string p;
    read(j, "keywords", p, "config");
    c.keywords = resolve(base_dir, p);
  }
  if (j.contains("prompts_dir")) {
    std::string p;
    read(j, "prompts_dir", p, "config");
    c.prompts_dir = resolve(base_dir, p);
  }
  if (j.contains("input_dir")) {
    std::string p;
    read(j, "input_dir", p, "config");
    c.input_dir = resolve(base_dir, p);
  }
  if (j.contains("output_dir")) {
    std::string p;
    read(j, "output_dir", p, "config");
    c.output_dir = resolve(base_dir, p);
  }
  read(j, "parallelism", c.parallelism, "config");
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path, const EnvLookup& env) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_pipeline_config(text, path.parent_path(), env);
}

void to_json(json& j, const PipelineConfig& c) {
  j = json{
      {"tiling",
       {{"base_width", c.tiling.base_width},
        {"base_height", c.tiling.base_height},
        {"scale_factor", c.tiling.scale_factor},
        {"scale_count", c.tiling.scale_count},
        {"overlap_ratio", c.tiling.overlap_ratio},
        {"min_visibility", c.tiling.min_visibility},
        {"edge_clamp", c.tiling.edge_clamp}}},
      {"kv",
       {{"area_threshold_fraction", c.kv.area_threshold_fraction},
        {"quantifier_thresholds", c.kv.quantifier_thresholds}}},
      {"detector",
       {{"kind", to_string(c.detector.kind)},
        {"location", c.detector.location},
        {"confidence_floor", c.detector.confidence_floor},
        {"noise_seed", c.detector.noise_seed},
        {"drop_rate", c.detector.drop_rate},
        {"jitter_px", c.detector.jitter_px},
        {"max_in_flight", c.detector.max_in_flight},
        {"timeout_ms", c.detector.timeout_ms}}},
      {"stages",
       {{"enable_detector", c.stages.toggles.enable_detector},
        {"enable_stage1", c.stages.toggles.enable_stage1},
        {"enable_stage2", c.stages.toggles.enable_stage2},
        {"stage1", chat_json(c.stages.stage1)},
        {"stage2", chat_json(c.stages.stage2)}}},
      {"output_dir", c.output_dir.string()},
      {"parallelism", c.parallelism}};
  if (c.keywords) j["keywords"] = c.keywords->string();
  if (c.prompts_dir) j["prompts_dir"] = c.prompts_dir->string();
  if (c.input_dir) j["input_dir"] = c.input_dir->string();
}

}  // namespace wtdiag
