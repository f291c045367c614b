#include <benchmark/benchmark.h>

#include <random>

#include "wtdiag/kvmap.hpp"
#include "wtdiag/label_io.hpp"
#include "wtdiag/metrics.hpp"
#include "wtdiag/tiler.hpp"

using namespace wtdiag;

namespace {

std::vector<Detection> random_detections(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0, 1800);
  std::vector<Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng) * 0.5;
    out.push_back({int(rng() % 4), {x, y, x + 20 + u(rng) / 20, y + 20 + u(rng) / 20},
                   double(rng() % 1000) / 1000});
  }
  return out;
}

}  // namespace

static void BM_GenerateWindows(benchmark::State& state) {
  TilingConfig cfg;
  cfg.scale_count = static_cast<int>(state.range(0));
  cfg.scale_factor = 0.7;
  for (auto _ : state) benchmark::DoNotOptimize(generate_windows(3840, 2160, cfg));
}
BENCHMARK(BM_GenerateWindows)->Arg(1)->Arg(2)->Arg(4);

static void BM_AveragePrecision(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto preds = random_detections(n, 1);
  std::vector<Annotation> gts;
  for (const auto& d : random_detections(n / 2, 2)) gts.push_back({d.class_id, d.box});
  for (std::size_t i = 0; i < n / 2; ++i) gts.push_back({preds[i].class_id, preds[i].box});
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(preds, gts, 0));
}
BENCHMARK(BM_AveragePrecision)->Arg(100)->Arg(1000);

static void BM_Summarize(benchmark::State& state) {
  const auto dets = random_detections(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(render_text(summarize(dets, 1920.0 * 1080.0)));
}
BENCHMARK(BM_Summarize)->Arg(10)->Arg(1000);

static void BM_ParseLabels(benchmark::State& state) {
  std::vector<Annotation> anns;
  for (const auto& d : random_detections(static_cast<std::size_t>(state.range(0)), 4)) {
    anns.push_back({d.class_id, d.box});
  }
  const std::string text = write_label_file(anns, 1920, 1080);
  for (auto _ : state) benchmark::DoNotOptimize(parse_label_file(text, 1920, 1080));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseLabels)->Arg(100)->Arg(10000);
BENCHMARK_MAIN();
