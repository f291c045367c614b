// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances and time limits are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wtdiag/chat.hpp"
#include "wtdiag/detector.hpp"
#include "wtdiag/image.hpp"
#include "wtdiag/kvmap.hpp"
#include "wtdiag/metrics.hpp"
#include "wtdiag/pipeline.hpp"
#include "wtdiag/tiler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wtdiag;
using wtdiag::fixtures::TempDir;

namespace {

constexpr double kTilingBudgetS = 5.0;
constexpr double kCoverageBudgetS = 10.0;
constexpr double kApBudgetS = 60.0;
constexpr double kFreqSumTol = 1e-9;
constexpr double kApTol = 1e-9;
constexpr double kMinExpansion = 5.0;
constexpr double kMaxGrowthRatio = 1.5;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few mismatch messages of a criterion.
struct Check {
  bool ok = true;
  int failures = 0;
  std::ostringstream msg;
  void fail(const std::string& m) {
    if (failures++ < 3) msg << m << "; ";
    ok = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string cli(const std::string& args, int* code) {
  return fixtures::run_command(std::string(WTDIAG_CLI_PATH) + " " + args + " 2>&1", code);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Outcome tiling_formula_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(20240601);
  Check c;
  int tuples = 0;
  while (tuples < 200) {
    oracle::GridTiling g;
    g.base_w = std::uniform_int_distribution<int>(1, 1500)(rng);
    g.base_h = std::uniform_int_distribution<int>(1, 1500)(rng);
    g.r_num = std::uniform_int_distribution<int>(20, 180)(rng);
    g.scale_count = std::uniform_int_distribution<int>(1, 3)(rng);
    g.o_num = std::uniform_int_distribution<int>(1, 999)(rng);
    g.edge_clamp = true;
    const int w = std::uniform_int_distribution<int>(1, 4000)(rng);
    const int h = std::uniform_int_distribution<int>(1, 4000)(rng);
    const auto ref = oracle::enumerate(w, h, g);
    if (std::any_of(ref.begin(), ref.end(), [](const auto& s) { return s.win_w < 1 || s.win_h < 1; })) {
      continue;  // outside the domain of the formulas
    }
    ++tuples;
    const TilingConfig cfg{g.base_w, g.base_h, g.r_num / 100.0, g.scale_count, g.o_num / 1000.0, 0.3, true};
    const auto wins = generate_windows(w, h, cfg);
    for (const auto& s : ref) {
      const auto [ww, wh] = window_size(cfg, s.k);
      const int sw = stride(ww, cfg.overlap_ratio), sh = stride(wh, cfg.overlap_ratio);
      if (ww != s.win_w || wh != s.win_h) c.fail("window size k=" + std::to_string(s.k));
      if (sw != s.stride_w || sh != s.stride_h) c.fail("stride k=" + std::to_string(s.k));
      std::set<int> xs, ys;
      for (const auto& win : wins) {
        if (win.scale_index != s.k) continue;
        xs.insert(win.origin_x);
        ys.insert(win.origin_y);
      }
      if (xs.size() != s.xs.size() || ys.size() != s.ys.size()) {
        c.fail("axis count k=" + std::to_string(s.k) + " image " + std::to_string(w) + "x" +
               std::to_string(h));
      }
      const std::size_t per_scale = std::count_if(wins.begin(), wins.end(),
                                                  [&](const CropWindow& x) { return x.scale_index == s.k; });
      if (per_scale != s.xs.size() * s.ys.size()) c.fail("window count k=" + std::to_string(s.k));
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kTilingBudgetS) c.fail("runtime " + fmt(secs) + " s");
  return {c.ok, std::to_string(tuples) + " tuples, " + fmt(secs) + " s " + c.msg.str()};
}

Outcome coverage_invariant() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr int W = 1920, H = 1080;
  std::mt19937 rng(77);
  Check c;
  int configs = 0, scales = 0;
  std::vector<int> diff(static_cast<std::size_t>(W + 1) * (H + 1));
  while (configs < 40) {
    TilingConfig cfg;
    cfg.base_width = std::uniform_int_distribution<int>(64, 1920)(rng);
    cfg.base_height = std::uniform_int_distribution<int>(64, 1080)(rng);
    cfg.scale_factor = std::uniform_int_distribution<int>(30, 150)(rng) / 100.0;
    cfg.scale_count = std::uniform_int_distribution<int>(1, 3)(rng);
    cfg.overlap_ratio = std::uniform_int_distribution<int>(50, 950)(rng) / 1000.0;
    cfg.edge_clamp = true;
    const auto wins = generate_windows(W, H, cfg);
    if (wins.empty()) continue;
    ++configs;
    for (int k = 0; k < cfg.scale_count; ++k) {
      std::fill(diff.begin(), diff.end(), 0);
      bool applied = false;
      for (const auto& w : wins) {
        if (w.scale_index != k) continue;
        applied = true;
        const auto at = [&](int x, int y) -> int& { return diff[static_cast<std::size_t>(y) * (W + 1) + x]; };
        at(w.origin_x, w.origin_y) += 1;
        at(w.origin_x + w.width, w.origin_y) -= 1;
        at(w.origin_x, w.origin_y + w.height) -= 1;
        at(w.origin_x + w.width, w.origin_y + w.height) += 1;
      }
      if (!applied) continue;
      ++scales;
      // 2-D prefix sum; every pixel must end with a positive count
      std::vector<int> row(W + 1, 0);
      long uncovered = 0;
      for (int y = 0; y < H; ++y) {
        int run = 0;
        for (int x = 0; x < W; ++x) {
          run += diff[static_cast<std::size_t>(y) * (W + 1) + x];
          row[x] += run;
          uncovered += row[x] <= 0;
        }
      }
      if (uncovered) c.fail(std::to_string(uncovered) + " uncovered pixels at k=" + std::to_string(k));
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kCoverageBudgetS) c.fail("runtime " + fmt(secs) + " s");
  return {c.ok, std::to_string(configs) + " configs, " + std::to_string(scales) + " scales, " +
                    fmt(secs) + " s " + c.msg.str()};
}

Outcome remap_soundness() {
  std::mt19937 rng(31337);
  Check c;
  std::size_t checked = 0;
  for (int set = 0; set < 100; ++set) {
    const int w = std::uniform_int_distribution<int>(400, 1600)(rng);
    const int h = std::uniform_int_distribution<int>(400, 1200)(rng);
    std::vector<Annotation> anns;
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    for (int i = 0; i < n; ++i) anns.push_back(fixtures::random_annotation(rng, w, h, 4, 400, i % 4));
    TilingConfig cfg;
    cfg.base_width = std::uniform_int_distribution<int>(200, 400)(rng);
    cfg.base_height = std::uniform_int_distribution<int>(200, 400)(rng);
    cfg.min_visibility = std::uniform_int_distribution<int>(5, 100)(rng) / 100.0;
    std::vector<bool> seen(anns.size(), false), eligible(anns.size(), false);
    for (const auto& win : generate_windows(w, h, cfg)) {
      const auto out = remap_annotations(anns, win, cfg.min_visibility);
      std::size_t expected_count = 0;
      for (std::size_t i = 0; i < anns.size(); ++i) {
        const BBox& b = anns[i].box;
        const double ix1 = std::max<double>(b.x1, win.origin_x);
        const double iy1 = std::max<double>(b.y1, win.origin_y);
        const double ix2 = std::min<double>(b.x2, win.origin_x + win.width);
        const double iy2 = std::min<double>(b.y2, win.origin_y + win.height);
        if (ix2 <= ix1 || iy2 <= iy1) continue;
        const double frac = (ix2 - ix1) * (iy2 - iy1) / ((b.x2 - b.x1) * (b.y2 - b.y1));
        if (frac < cfg.min_visibility) continue;
        eligible[i] = true;
        ++expected_count;
        const Annotation want{anns[i].class_id,
                              {ix1 - win.origin_x, iy1 - win.origin_y, ix2 - win.origin_x, iy2 - win.origin_y}};
        if (std::find(out.begin(), out.end(), want) == out.end()) {
          c.fail("box " + std::to_string(i) + " missing from window s" + std::to_string(win.scale_index) +
                 " x" + std::to_string(win.origin_x) + " y" + std::to_string(win.origin_y));
        } else {
          seen[i] = true;
        }
        ++checked;
      }
      if (out.size() != expected_count) c.fail("unexpected extra boxes in a window");
      for (const auto& a : out) {
        if (!(a.box.x1 >= 0 && a.box.y1 >= 0 && a.box.x2 <= win.width && a.box.y2 <= win.height &&
              a.box.x1 < a.box.x2 && a.box.y1 < a.box.y2)) {
          c.fail("emitted box outside crop");
        }
      }
    }
    for (std::size_t i = 0; i < anns.size(); ++i) {
      if (eligible[i] && !seen[i]) c.fail("eligible box never emitted");
    }
  }
  return {c.ok, "100 sets, " + std::to_string(checked) + " eligible placements " + c.msg.str()};
}

Outcome kv_boundaries() {
  Check c;
  const std::vector<std::pair<double, std::optional<std::string>>> cases{
      {0.2, std::nullopt},
      {std::nextafter(0.2, 1.0), "few"},
      {0.4, "few"},
      {std::nextafter(0.4, 1.0), "some"},
      {0.5, "some"},
      {std::nextafter(0.5, 1.0), "over half"},
      {0.8, "over half"},
      {std::nextafter(0.8, 1.0), "almost all"}};
  for (const auto& [f, want] : cases) {
    if (quantifier(f) != want) c.fail("quantifier(" + fmt(f) + ")");
  }
  std::mt19937 rng(1000);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    std::vector<Detection> d;
    for (int i = 0; i < n; ++i) d.push_back({int(rng() % 4), {0, 0, 1, 1}, 1.0});
    double sum = 0;
    for (const auto& [cls, cf] : class_frequencies(d)) sum += cf.frequency;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  if (worst > kFreqSumTol) c.fail("frequency sum off by " + fmt(worst));
  return {c.ok, "8 boundary points, 1000 sets, max |sum-1| = " + fmt(worst) + " " + c.msg.str()};
}

Outcome ap_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  std::size_t instances = 0;
  double worst = 0;
  // Ground truths are disjoint boxes; each ranked prediction either sits
  // exactly on one of them or misses all. Enumerating every sequence of
  // targets covers every confidence ordering of every such instance.
  for (int g = 0; g <= 5; ++g) {
    std::vector<Annotation> gts;
    for (int i = 0; i < g; ++i) gts.push_back({0, {100.0 * i, 0, 100.0 * i + 50, 50}});
    const BBox miss{1000, 1000, 1050, 1050};
    for (int p = 0; p <= 8; ++p) {
      std::vector<int> target(static_cast<std::size_t>(p), 0);
      std::vector<Detection> preds(static_cast<std::size_t>(p));
      while (true) {
        for (int i = 0; i < p; ++i) {
          preds[i] = {0, target[i] < g ? gts[target[i]].box : miss, 1.0 - 0.01 * i};
        }
        const double got = average_precision(preds, gts, 0);
        const double want = oracle::average_precision(preds, gts, 0, kMap50Iou);
        const double err = std::abs(got - want);
        worst = std::max(worst, err);
        if (err > kApTol) c.fail("g=" + std::to_string(g) + " p=" + std::to_string(p));
        ++instances;
        int pos = 0;
        while (pos < p && ++target[pos] > g) target[pos++] = 0;
        if (pos == p) break;
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kApBudgetS) c.fail("runtime " + fmt(secs) + " s");
  return {c.ok, std::to_string(instances) + " instances, max error " + fmt(worst) + ", " + fmt(secs) +
                    " s " + c.msg.str()};
}

Outcome perfect_detector_identity() {
  TempDir tmp;
  fixtures::write_fixture(tmp / "data", {.count = 50, .width = 320, .height = 240, .boxes_per_image = 5,
                                        .min_box = 8, .max_box = 80, .seed = 50});
  int code = 0;
  const auto det = cli("detect --seed 0 --in " + (tmp / "data").string() + " --out " + (tmp / "pred").string(), &code);
  if (code != 0) return {false, "detect failed: " + det};
  const auto ev = cli("evaluate --pred " + (tmp / "pred").string() + " --gt " + (tmp / "data").string() +
                          " --out " + (tmp / "ev").string(),
                      &code);
  if (code != 0) return {false, "evaluate failed: " + ev};
  const auto j = json::parse(read_text_file(tmp / "ev" / "eval.json"));
  Check c;
  for (const char* k : {"precision", "recall", "f1", "map50"}) {
    if (j.at(k).get<double>() != 1.0) c.fail(std::string(k) + " = " + fmt(j.at(k).get<double>()));
  }
  return {c.ok, "50 images, " + std::to_string(j.at("tp").get<int>()) + " boxes, P=Re=F1=mAP50=" +
                    fmt(j.at("map50").get<double>()) + " " + c.msg.str()};
}

// Mean FCS over a fixture whose images each contain all four classes.
double pipeline_fcs(const std::vector<ImageRecord>& records, ChatTransport& stage1, ChatTransport& stage2) {
  auto detector = make_provider(ProviderConfig{});
  PipelineContext ctx;
  ctx.detector = detector.get();
  ctx.stage1 = &stage1;
  ctx.stage2 = &stage2;
  ctx.clock = fixed_clock("t");
  double sum = 0;
  for (const auto& rec : records) {
    const auto r = run_pipeline(rec, ctx, StageConfig{});
    std::set<ClassId> detected;
    for (const auto& d : r.detections->detections) detected.insert(d.class_id);
    sum += fcs(r.report.all_text(), detected);
  }
  return sum / static_cast<double>(records.size());
}

Outcome fcs_stub_round_trip() {
  TempDir tmp;
  const auto recs = fixtures::write_fixture(tmp.path(), {.count = 6, .width = 200, .height = 160, .boxes_per_image = 8,
                                                        .min_box = 8, .max_box = 40, .seed = 4});
  StubTransport plain;
  const double full = pipeline_fcs(recs, plain, plain);
  StubTransport suppressed({3});
  const double partial = pipeline_fcs(recs, suppressed, suppressed);
  Check c;
  if (full != 1.0) c.fail("full FCS " + fmt(full));
  if (partial != 0.75) c.fail("suppressed FCS " + fmt(partial));
  return {c.ok, "FCS full=" + fmt(full) + ", one class suppressed=" + fmt(partial) + " " + c.msg.str()};
}

Outcome ablation_matrix() {
  TempDir tmp;
  fixtures::write_fixture(tmp / "data", {.count = 4, .width = 200, .height = 160, .boxes_per_image = 4,
                                        .min_box = 8, .max_box = 40, .seed = 6});
  int code = 0;
  const auto out = cli("ablate --stub --in " + (tmp / "data").string() + " --out " + (tmp / "res").string(), &code);
  if (code != 0) return {false, "ablate failed: " + out};
  const auto rows = json::parse(read_text_file(tmp / "res" / "ablation.json"));
  struct Row {
    const char* variant;
    bool detection, analysis, advice;
  };
  const Row expected[] = {{"detector+advice", true, false, true},
                          {"detector+analysis", true, true, false},
                          {"analysis+advice", false, true, true},
                          {"detector+analysis+advice", true, true, true}};
  Check c;
  if (rows.size() != 4) return {false, "expected 4 rows, got " + std::to_string(rows.size())};
  int cells = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = rows[i];
    if (r.at("variant") != expected[i].variant) c.fail("row order at " + std::to_string(i));
    const auto& cat = r.at("categories");
    cells += cat.at("detection") == expected[i].detection;
    cells += cat.at("analysis") == expected[i].analysis;
    cells += cat.at("advice") == expected[i].advice;
  }
  if (cells != 12) c.fail(std::to_string(cells) + "/12 cells match");
  return {c.ok, std::to_string(cells) + "/12 cells match " + c.msg.str()};
}

Outcome determinism() {
  TempDir tmp;
  fixtures::write_fixture(tmp / "data", {.count = 5, .width = 240, .height = 180, .boxes_per_image = 6,
                                        .min_box = 8, .max_box = 60, .seed = 70});
  write_text_file(tmp / "c.json", R"({"detector": {"kind": "synthetic", "drop_rate": 0.3, "jitter_px": 4}})");
  int code = 0;
  for (const char* out : {"run1", "run2"}) {
    const auto log = cli("diagnose --stub --seed 7 --config " + (tmp / "c.json").string() + " --in " +
                             (tmp / "data").string() + " --out " + (tmp / out).string(),
                         &code);
    if (code != 0) return {false, std::string("diagnose failed: ") + log};
  }
  Check c;
  int files = 0;
  for (const auto& e : fs::directory_iterator(tmp / "run1")) {
    const std::string name = e.path().filename().string();
    if (!name.ends_with(".report.json")) continue;
    ++files;
    if (!fs::exists(tmp / "run2" / name) || read_file_bytes(e.path()) != read_file_bytes(tmp / "run2" / name)) {
      c.fail(name + " differs");
    }
  }
  if (files != 5) c.fail(std::to_string(files) + " reports written");
  return {c.ok, std::to_string(files) + " report files byte-identical " + c.msg.str()};
}

Outcome expansion_sanity() {
  TempDir tmp;
  const auto data = tmp / "data";
  const std::pair<int, int> sizes[] = {{960, 720}, {1024, 768}, {800, 600}, {1280, 720}};
  for (int i = 0; i < 4; ++i) {
    fixtures::write_fixture(data, {.count = 5, .width = sizes[i].first, .height = sizes[i].second,
                                  .boxes_per_image = 8, .min_box = 20, .max_box = 120,
                                  .seed = static_cast<std::uint32_t>(100 + i),
                                  .prefix = "set" + std::to_string(i) + "_"});
  }
  int code = 0;
  const auto log = cli("augment --in " + data.string() + " --out " + (tmp / "out").string(), &code);
  if (code != 0) return {false, "augment failed: " + log};
  const auto m = json::parse(read_text_file(tmp / "out" / "manifest.json"));
  Check c;
  const double factor = m.at("expansion_factor").get<double>();
  if (m.at("images_in") != 20) c.fail("images_in " + m.at("images_in").dump());
  if (!(factor >= kMinExpansion)) c.fail("expansion " + fmt(factor));
  double lo = 1e300, hi = 0;
  for (const auto& [name, n_in] : m.at("annotations_in").items()) {
    const double growth = m.at("annotations_out").at(name).get<double>() / n_in.get<double>();
    lo = std::min(lo, growth);
    hi = std::max(hi, growth);
  }
  const double ratio = hi / lo;
  if (!(ratio <= kMaxGrowthRatio)) c.fail("growth ratio " + fmt(ratio));
  return {c.ok, "expansion " + fmt(factor) + "x, class growth " + fmt(lo) + ".." + fmt(hi) + " (ratio " +
                    fmt(ratio) + ") " + c.msg.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"tiling-formula-suite", tiling_formula_suite},
      {"coverage-invariant", coverage_invariant},
      {"remap-soundness", remap_soundness},
      {"kv-boundary-exactness", kv_boundaries},
      {"ap-oracle-equivalence", ap_oracle_equivalence},
      {"perfect-detector-identity", perfect_detector_identity},
      {"fcs-stub-round-trip", fcs_stub_round_trip},
      {"ablation-output-matrix", ablation_matrix},
      {"stub-determinism", determinism},
      {"expansion-sanity", expansion_sanity},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-27s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
