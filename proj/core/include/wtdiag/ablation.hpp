#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/metrics.hpp"
#include "wtdiag/pipeline.hpp"

namespace wtdiag {

struct AblationVariant {
  std::string name;
  StageToggles toggles;
};

// The four stage combinations, each dropping one component or keeping all:
// detector+advice, detector+analysis, analysis+advice, full.
const std::array<AblationVariant, 4>& ablation_variants();

struct AblationRow {
  AblationVariant variant;
  // A category is present when every successfully processed image
  // produced it.
  OutputCategories categories;
  double aps = 0;
  std::size_t images_ok = 0;
  std::vector<std::string> errors;  // "<image>: <message>" per failed image
};

struct AblationTable {
  std::vector<AblationRow> rows;  // empty for an empty dataset
};

struct AblationInputs {
  DetectionProvider* detector = nullptr;
  ChatTransport* stage1 = nullptr;
  ChatTransport* stage2 = nullptr;
  const PromptSet* prompts = &default_prompts();
  KvConfig kv;
  ChatRequest stage1_template;
  ChatRequest stage2_template;
  KeywordSpec keywords = default_keyword_spec();
  Clock clock = system_clock_utc();
  int parallelism = 1;
};

// Runs the pipeline over every record under each variant. APS scores each
// report against the keywords of the record's ground-truth classes. A failure
// on one image is recorded in that row and does not affect other cells.
AblationTable run_ablation(const std::vector<ImageRecord>& records,
                           const AblationInputs& inputs);

void to_json(nlohmann::json& j, const AblationTable& t);
std::string format_table(const AblationTable& t);

}  // namespace wtdiag
