#include "wtdiag/pipeline.hpp"

#include <chrono>
#include <ctime>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/overlay.hpp"

namespace wtdiag {

void StageConfig::validate() const {
  if (!toggles.enable_detector && !toggles.enable_stage1 && !toggles.enable_stage2) {
    throw DomainError("at least one pipeline stage must be enabled");
  }
  if (toggles.enable_stage2 && !toggles.enable_stage1 && !toggles.enable_detector) {
    throw DomainError("the advice stage needs the detector or the analysis stage");
  }
}

Clock system_clock_utc() {
  return [] {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

Clock fixed_clock(std::string timestamp) {
  return [ts = std::move(timestamp)] { return ts; };
}

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::string transport_tag(const ChatTransport& t, const ChatRequest& req) {
  return req.model.empty() ? t.tag() : t.tag() + ":" + req.model;
}

}  // namespace

PipelineResult run_pipeline(const ImageRecord& image, PipelineContext& ctx,
                            const StageConfig& stages) {
  stages.validate();
  const StageToggles& on = stages.toggles;
  if (on.enable_detector && !ctx.detector) throw DomainError("detector enabled but not provided");
  if (on.enable_stage1 && !ctx.stage1) throw DomainError("analysis stage enabled but no transport");
  if (on.enable_stage2 && !ctx.stage2) throw DomainError("advice stage enabled but no transport");

  PipelineResult result;
  result.image = image;
  DiagnosticReport& report = result.report;
  report.provenance.started_at = ctx.clock();
  report.provenance.prompt_version = ctx.prompts->version;

  if (on.enable_detector) {
    result.detections = in_stage("detector", [&] { return ctx.detector->detect(image); });
    report.provenance.detector = result.detections->provider_tag;
    result.summary = in_stage("kvmap", [&] { return summarize(*result.detections, ctx.kv); });
    result.kv_text = render_text(result.summary);
  }

  if (on.enable_stage1) {
    report.raw_stage1 = in_stage("stage1", [&] {
      Image pixels = load_image(image.path);
      if (result.detections) {
        pixels = render_overlay(pixels, result.detections->detections);
      }
      result.stage1_image = pixels;
      const ChatRequest req = build_stage1_prompt(result.kv_text, result.stage1_image,
                                                  stages.stage1, *ctx.prompts);
      return invoke(req, *ctx.stage1);
    });
    report.provenance.stage1 = transport_tag(*ctx.stage1, stages.stage1);
  }

  if (on.enable_stage2) {
    const std::string& input = on.enable_stage1 ? report.raw_stage1 : result.kv_text;
    const std::string advice = in_stage("stage2", [&] {
      return invoke(build_stage2_prompt(input, stages.stage2, *ctx.prompts), *ctx.stage2);
    });
    DiagnosticReport parsed = parse_report(advice);
    report.fault_types = std::move(parsed.fault_types);
    report.severity = std::move(parsed.severity);
    report.cause = std::move(parsed.cause);
    report.maintenance = std::move(parsed.maintenance);
    report.raw_stage2 = std::move(parsed.raw_stage2);
    report.provenance.missing_sections = std::move(parsed.provenance.missing_sections);
    report.provenance.stage2 = transport_tag(*ctx.stage2, stages.stage2);
  } else if (result.detections) {
    for (const auto& e : result.summary.entries) {
      report.fault_types.push_back(fault_class(e.class_id).canonical_name);
    }
  } else {
    for (ClassId c : mentioned_classes(report.raw_stage1)) {
      report.fault_types.push_back(fault_class(c).canonical_name);
    }
    if (report.fault_types.empty()) report.fault_types.emplace_back(kUnknownFault);
  }

  result.categories.detection = result.detections.has_value();
  result.categories.analysis = !report.raw_stage1.empty();
  result.categories.advice = !report.maintenance.empty();
  report.provenance.finished_at = ctx.clock();
  return result;
}

void to_json(nlohmann::json& j, const OutputCategories& c) {
  j = nlohmann::json{{"detection", c.detection},
                     {"analysis", c.analysis},
                     {"advice", c.advice}};
}

void to_json(nlohmann::json& j, const PipelineResult& r) {
  j = nlohmann::json{
      {"image", r.image.path.filename().string()},
      {"categories", r.categories},
      {"detections", r.detections ? nlohmann::json(*r.detections) : nlohmann::json(nullptr)},
      {"fault_summary", r.summary},
      {"kv_text", r.kv_text},
      {"report", r.report}};
}

}  // namespace wtdiag
