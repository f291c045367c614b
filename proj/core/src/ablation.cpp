#include "wtdiag/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"

namespace wtdiag {

const std::array<AblationVariant, 4>& ablation_variants() {
  static const std::array<AblationVariant, 4> variants = {{
      {"detector+advice", {true, false, true}},
      {"detector+analysis", {true, true, false}},
      {"analysis+advice", {false, true, true}},
      {"detector+analysis+advice", {true, true, true}},
  }};
  return variants;
}

namespace {

AblationRow run_variant(const AblationVariant& variant,
                        const std::vector<ImageRecord>& records,
                        const AblationInputs& in) {
  AblationRow row;
  row.variant = variant;
  row.categories = {true, true, true};

  PipelineContext ctx;
  ctx.detector = in.detector;
  ctx.stage1 = in.stage1;
  ctx.stage2 = in.stage2;
  ctx.prompts = in.prompts;
  ctx.kv = in.kv;
  ctx.clock = in.clock;
  StageConfig stages{in.stage1_template, in.stage2_template, variant.toggles};

  std::vector<ScoredReport> scored;
  for (const auto& rec : records) {
    try {
      PipelineResult result = run_pipeline(rec, ctx, stages);
      row.categories.detection &= result.categories.detection;
      row.categories.analysis &= result.categories.analysis;
      row.categories.advice &= result.categories.advice;
      ScoredReport sr;
      sr.report = std::move(result.report);
      for (const auto& a : rec.annotations) sr.expected_classes.insert(a.class_id);
      scored.push_back(std::move(sr));
      ++row.images_ok;
    } catch (const Error& e) {
      row.errors.push_back(rec.path.filename().string() + ": " + e.what());
    }
  }
  if (row.images_ok == 0) row.categories = {};
  row.aps = aps(scored, in.keywords).score;
  return row;
}

}  // namespace

AblationTable run_ablation(const std::vector<ImageRecord>& records,
                           const AblationInputs& inputs) {
  AblationTable table;
  if (records.empty()) return table;
  const auto& variants = ablation_variants();
  table.rows.resize(variants.size());
  if (inputs.parallelism <= 1) {
    for (std::size_t i = 0; i < variants.size(); ++i) {
      table.rows[i] = run_variant(variants[i], records, inputs);
    }
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      workers.emplace_back([&, i] { table.rows[i] = run_variant(variants[i], records, inputs); });
    }
  }
  return table;
}

void to_json(nlohmann::json& j, const AblationTable& t) {
  j = nlohmann::json::array();
  for (const auto& r : t.rows) {
    j.push_back({{"variant", r.variant.name},
                 {"detector", r.variant.toggles.enable_detector},
                 {"analysis_stage", r.variant.toggles.enable_stage1},
                 {"advice_stage", r.variant.toggles.enable_stage2},
                 {"categories", r.categories},
                 {"aps", r.aps},
                 {"images_ok", r.images_ok},
                 {"errors", r.errors}});
  }
}

std::string format_table(const AblationTable& t) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-26s %-10s %-10s %-10s %6s\n", "variant",
                "detection", "analysis", "advice", "APS");
  out += buf;
  auto mark = [](bool b) { return b ? "yes" : "-"; };
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof(buf), "%-26s %-10s %-10s %-10s %6.3f\n",
                  r.variant.name.c_str(), mark(r.categories.detection),
                  mark(r.categories.analysis), mark(r.categories.advice), r.aps);
    out += buf;
  }
  return out;
}

}  // namespace wtdiag
