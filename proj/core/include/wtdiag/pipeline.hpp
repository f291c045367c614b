#pragma once

#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/chat.hpp"
#include "wtdiag/detector.hpp"
#include "wtdiag/kvmap.hpp"
#include "wtdiag/prompts.hpp"
#include "wtdiag/report.hpp"

namespace wtdiag {

struct StageToggles {
  bool enable_detector = true;
  bool enable_stage1 = true;  // image + summary analysis
  bool enable_stage2 = true;  // text-only advice report

  friend bool operator==(const StageToggles&, const StageToggles&) = default;
};

struct StageConfig {
  ChatRequest stage1;  // template; messages are filled per image
  ChatRequest stage2;
  StageToggles toggles;

  // At least one stage on; the advice stage needs an input, so it requires
  // the detector or the analysis stage.
  void validate() const;
};

// Returns an ISO-8601 UTC timestamp.
using Clock = std::function<std::string()>;
Clock system_clock_utc();
Clock fixed_clock(std::string timestamp);

// Collaborators for one pipeline run. Pointers for disabled stages may be
// null.
struct PipelineContext {
  DetectionProvider* detector = nullptr;
  ChatTransport* stage1 = nullptr;
  ChatTransport* stage2 = nullptr;
  const PromptSet* prompts = &default_prompts();
  KvConfig kv;
  Clock clock = system_clock_utc();
};

struct OutputCategories {
  bool detection = false;
  bool analysis = false;
  bool advice = false;

  friend bool operator==(const OutputCategories&, const OutputCategories&) = default;
};

struct PipelineResult {
  ImageRecord image;
  std::optional<DetectionSet> detections;
  FaultSummary summary;
  std::string kv_text;  // empty when the detector was off
  DiagnosticReport report;
  OutputCategories categories;
  std::optional<Image> stage1_image;  // what the analysis stage was shown
};

// detector -> summary text -> analysis -> advice, skipping disabled stages.
// With the detector off, the analysis stage sees the plain image and no
// summary text. With the analysis stage off, the advice stage reads the
// summary text. Stage failures surface as StageError naming the stage.
PipelineResult run_pipeline(const ImageRecord& image, PipelineContext& context,
                            const StageConfig& stages);

void to_json(nlohmann::json& j, const OutputCategories& c);
void to_json(nlohmann::json& j, const PipelineResult& r);

}  // namespace wtdiag
