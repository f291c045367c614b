// wtdiag: batch front end for tiling, detection, text mapping, two-stage
// diagnosis and evaluation.
//
// Exit status: 0 success, 1 runtime failure, 2 usage error, 3 config error.
// Failures print one JSON line {"error":{"kind":..,"message":..}} on stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "wtdiag/ablation.hpp"
#include "wtdiag/chat.hpp"
#include "wtdiag/config.hpp"
#include "wtdiag/dataset.hpp"
#include "wtdiag/detector.hpp"
#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/image.hpp"
#include "wtdiag/kvmap.hpp"
#include "wtdiag/label_io.hpp"
#include "wtdiag/metrics.hpp"
#include "wtdiag/overlay.hpp"
#include "wtdiag/pipeline.hpp"
#include "wtdiag/tiler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

// Timestamp written into reports of stub runs so they are byte-reproducible.
constexpr const char* kStubTimestamp = "1970-01-01T00:00:00Z";

struct Options {
  std::string config;
  std::string in;
  std::string out;
  std::string pred;
  std::string gt;
  bool stub = false;
  std::optional<std::uint64_t> seed;
  bool dry_run = false;
  std::optional<int> parallelism;
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump()
            << std::endl;
}

wtdiag::PipelineConfig load_config(const Options& opt) {
  wtdiag::PipelineConfig cfg = opt.config.empty()
                                   ? wtdiag::parse_pipeline_config("{}")
                                   : wtdiag::load_pipeline_config(opt.config);
  if (opt.seed) cfg.detector.noise_seed = *opt.seed;
  if (opt.parallelism) cfg.parallelism = *opt.parallelism;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (!opt.pred.empty()) {
    cfg.detector.kind = wtdiag::ProviderKind::kFile;
    cfg.detector.location = opt.pred;
  }
  cfg.validate();
  return cfg;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw wtdiag::IoError("cannot create " + dir.string() + ": " + ec.message());
}

wtdiag::DatasetScan scan_input(const Options& opt, const wtdiag::PipelineConfig& cfg) {
  fs::path dir = opt.in;
  if (dir.empty()) {
    if (!cfg.input_dir) throw CLI::RequiredError("--in (or input_dir in the config)");
    dir = *cfg.input_dir;
  }
  auto scan = wtdiag::scan_dataset(dir);
  for (const auto& name : scan.missing_labels) {
    std::cerr << "warning: no label file for " << name << "\n";
  }
  return scan;
}

// Runs fn(i) for i in [0, n) on up to `parallelism` threads; the first
// exception in index order is rethrown after all work finishes.
template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(parallelism, 1, static_cast<int>(std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

wtdiag::PromptSet prompts_for(const wtdiag::PipelineConfig& cfg) {
  return cfg.prompts_dir ? wtdiag::load_prompts(*cfg.prompts_dir) : wtdiag::default_prompts();
}

wtdiag::KeywordSpec keywords_for(const wtdiag::PipelineConfig& cfg) {
  return cfg.keywords ? wtdiag::load_keyword_spec(*cfg.keywords)
                      : wtdiag::default_keyword_spec();
}

void require_endpoints(const wtdiag::PipelineConfig& cfg, bool need1, bool need2) {
  if (need1 && cfg.stages.stage1.endpoint.empty()) {
    throw wtdiag::ConfigError("stages.stage1.endpoint is required without --stub");
  }
  if (need2 && cfg.stages.stage2.endpoint.empty()) {
    throw wtdiag::ConfigError("stages.stage2.endpoint is required without --stub");
  }
}

int cmd_augment(const Options& opt) {
  const auto cfg = load_config(opt);
  const auto scan = scan_input(opt, cfg);
  if (opt.dry_run) {
    const auto counts = wtdiag::plan_augmentation(scan.records, cfg.tiling);
    std::size_t total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      std::cout << scan.records[i].path.filename().string() << '\t' << counts[i] << '\n';
      total += counts[i];
    }
    std::cout << "total\t" << total << '\n';
    return 0;
  }
  const auto manifest =
      wtdiag::augment_dataset(scan.records, cfg.tiling, cfg.output_dir, cfg.parallelism);
  const json j = manifest;
  wtdiag::write_text_file(cfg.output_dir / "manifest.json", j.dump(2) + "\n");
  std::cout << "images_in " << manifest.images_in << "\nimages_out " << manifest.images_out
            << "\nexpansion_factor " << manifest.expansion_factor << "\nmanifest "
            << (cfg.output_dir / "manifest.json").string() << '\n';
  return 0;
}

int cmd_validate(const Options& opt) {
  if (opt.in.empty()) throw CLI::RequiredError("--in");
  if (opt.out.empty()) throw CLI::RequiredError("--out");
  const auto report = wtdiag::validate_and_replenish(opt.in, opt.out);
  const json j = report;
  std::cout << j.dump(2) << '\n';
  return report.ok() ? 0 : kExitRuntime;
}

int cmd_detect(const Options& opt) {
  const auto cfg = load_config(opt);
  const auto scan = scan_input(opt, cfg);
  make_dir(cfg.output_dir);
  auto provider = wtdiag::make_provider(cfg.detector);
  std::vector<std::size_t> counts(scan.records.size());
  parallel_for(scan.records.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& rec = scan.records[i];
    const auto dset = provider->detect(rec);
    wtdiag::write_text_file(cfg.output_dir / (rec.stem() + ".txt"),
                            wtdiag::write_prediction_file(dset.detections, rec.width, rec.height));
    const auto overlay = wtdiag::render_overlay(wtdiag::load_image(rec.path), dset.detections);
    wtdiag::save_png(overlay, cfg.output_dir / (rec.stem() + "_overlay.png"));
    counts[i] = dset.detections.size();
  });
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::cout << scan.records[i].path.filename().string() << '\t' << counts[i] << '\n';
  }
  return 0;
}

int cmd_map(const Options& opt) {
  const auto cfg = load_config(opt);
  const auto scan = scan_input(opt, cfg);
  auto provider = wtdiag::make_provider(cfg.detector);
  if (!opt.out.empty()) make_dir(cfg.output_dir);
  for (const auto& rec : scan.records) {
    const auto dset = provider->detect(rec);
    const auto summary = wtdiag::summarize(dset, cfg.kv);
    const std::string text = wtdiag::render_text(summary);
    std::cout << rec.stem() << ": " << text << '\n';
    if (!opt.out.empty()) {
      const json j = summary;
      wtdiag::write_text_file(cfg.output_dir / (rec.stem() + ".kv.json"), j.dump(2) + "\n");
      wtdiag::write_text_file(cfg.output_dir / (rec.stem() + ".kv.txt"), text + "\n");
    }
  }
  return 0;
}

struct Transports {
  std::unique_ptr<wtdiag::ChatTransport> stage1;
  std::unique_ptr<wtdiag::ChatTransport> stage2;
};

Transports make_transports(const wtdiag::PipelineConfig& cfg, bool stub, bool need1,
                           bool need2) {
  Transports t;
  if (stub) {
    t.stage1 = std::make_unique<wtdiag::StubTransport>();
    t.stage2 = std::make_unique<wtdiag::StubTransport>();
  } else {
    require_endpoints(cfg, need1, need2);
    t.stage1 = std::make_unique<wtdiag::RemoteTransport>();
    t.stage2 = std::make_unique<wtdiag::RemoteTransport>();
  }
  return t;
}

int cmd_diagnose(const Options& opt) {
  const auto cfg = load_config(opt);
  const auto scan = scan_input(opt, cfg);
  make_dir(cfg.output_dir);
  const auto& toggles = cfg.stages.toggles;
  auto provider = wtdiag::make_provider(cfg.detector);
  auto transports = make_transports(cfg, opt.stub, toggles.enable_stage1, toggles.enable_stage2);
  const auto prompts = prompts_for(cfg);

  std::vector<wtdiag::OutputCategories> categories(scan.records.size());
  parallel_for(scan.records.size(), cfg.parallelism, [&](std::size_t i) {
    const auto& rec = scan.records[i];
    wtdiag::PipelineContext ctx;
    ctx.detector = provider.get();
    ctx.stage1 = transports.stage1.get();
    ctx.stage2 = transports.stage2.get();
    ctx.prompts = &prompts;
    ctx.kv = cfg.kv;
    ctx.clock = opt.stub ? wtdiag::fixed_clock(kStubTimestamp) : wtdiag::system_clock_utc();
    const auto result = wtdiag::run_pipeline(rec, ctx, cfg.stages);
    const json j = result;
    wtdiag::write_text_file(cfg.output_dir / (rec.stem() + ".report.json"), j.dump(2) + "\n");
    if (result.stage1_image) {
      wtdiag::save_png(*result.stage1_image, cfg.output_dir / (rec.stem() + "_overlay.png"));
    }
    categories[i] = result.categories;
  });
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    std::cout << scan.records[i].path.filename().string() << "\tdetection="
              << (c.detection ? "yes" : "no") << " analysis=" << (c.analysis ? "yes" : "no")
              << " advice=" << (c.advice ? "yes" : "no") << '\n';
  }
  return 0;
}

// Label files hold normalized coordinates and IoU is unchanged by scaling
// each axis, so files are compared in the unit square.
std::map<std::string, fs::path> label_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw wtdiag::IoError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") {
      out.emplace(e.path().stem().string(), e.path());
    }
  }
  return out;
}

int cmd_evaluate(const Options& opt) {
  if (opt.pred.empty()) throw CLI::RequiredError("--pred");
  if (opt.gt.empty()) throw CLI::RequiredError("--gt");
  wtdiag::PipelineConfig cfg =
      opt.config.empty() ? wtdiag::parse_pipeline_config("{}") : wtdiag::load_pipeline_config(opt.config);

  const auto preds = label_files(opt.pred);
  const auto gts = label_files(opt.gt);
  std::vector<std::string> stems;
  for (const auto& [s, p] : gts) stems.push_back(s);
  for (const auto& [s, p] : preds) {
    if (!gts.count(s)) stems.push_back(s);
  }
  std::sort(stems.begin(), stems.end());

  std::vector<wtdiag::ImageEval> images;
  std::map<std::string, std::set<wtdiag::ClassId>> gt_classes;
  wtdiag::PredictionParseOptions lenient{true};
  for (const auto& stem : stems) {
    wtdiag::ImageEval ev;
    if (auto it = gts.find(stem); it != gts.end()) {
      ev.gts = wtdiag::parse_label_file(wtdiag::read_text_file(it->second), 1, 1);
      for (const auto& a : ev.gts) gt_classes[stem].insert(a.class_id);
    }
    if (auto it = preds.find(stem); it != preds.end()) {
      ev.preds = wtdiag::parse_prediction_file(wtdiag::read_text_file(it->second), 1, 1, lenient);
    }
    images.push_back(std::move(ev));
  }
  wtdiag::EvalResult result = wtdiag::evaluate_detections(images);

  // --in: a diagnose output directory whose reports get FCS and APS.
  if (!opt.in.empty()) {
    std::vector<wtdiag::ScoredReport> scored;
    double fcs_sum = 0;
    std::size_t fcs_n = 0;
    for (const auto& e : fs::directory_iterator(opt.in)) {
      const std::string name = e.path().filename().string();
      if (!e.is_regular_file() || !name.ends_with(".report.json")) continue;
      const json j = json::parse(wtdiag::read_text_file(e.path()));
      wtdiag::DiagnosticReport report = j.at("report").get<wtdiag::DiagnosticReport>();
      std::set<wtdiag::ClassId> detected;
      if (!j.at("detections").is_null()) {
        for (const auto& d : j.at("detections").at("detections")) {
          detected.insert(d.at("class_id").get<int>());
        }
      }
      if (!detected.empty()) {
        fcs_sum += wtdiag::fcs(report.all_text(), detected);
        ++fcs_n;
      }
      const std::string stem = name.substr(0, name.size() - std::string(".report.json").size());
      scored.push_back({std::move(report), gt_classes[stem]});
    }
    if (fcs_n) result.fcs = fcs_sum / static_cast<double>(fcs_n);
    if (!scored.empty()) result.aps = wtdiag::aps(scored, keywords_for(cfg)).score;
  }

  std::cout << wtdiag::format_table(result);
  if (!opt.out.empty()) {
    make_dir(opt.out);
    const json j = result;
    wtdiag::write_text_file(fs::path(opt.out) / "eval.json", j.dump(2) + "\n");
  }
  return 0;
}

int cmd_ablate(const Options& opt) {
  const auto cfg = load_config(opt);
  const auto scan = scan_input(opt, cfg);
  auto provider = wtdiag::make_provider(cfg.detector);
  auto transports = make_transports(cfg, opt.stub, true, true);
  const auto prompts = prompts_for(cfg);

  wtdiag::AblationInputs in;
  in.detector = provider.get();
  in.stage1 = transports.stage1.get();
  in.stage2 = transports.stage2.get();
  in.prompts = &prompts;
  in.kv = cfg.kv;
  in.stage1_template = cfg.stages.stage1;
  in.stage2_template = cfg.stages.stage2;
  in.keywords = keywords_for(cfg);
  in.clock = opt.stub ? wtdiag::fixed_clock(kStubTimestamp) : wtdiag::system_clock_utc();
  in.parallelism = cfg.parallelism;

  const auto table = wtdiag::run_ablation(scan.records, in);
  std::cout << wtdiag::format_table(table);
  if (!opt.out.empty()) {
    make_dir(cfg.output_dir);
    const json j = table;
    wtdiag::write_text_file(cfg.output_dir / "ablation.json", j.dump(2) + "\n");
  }
  for (const auto& row : table.rows) {
    for (const auto& err : row.errors) std::cerr << row.variant.name << ": " << err << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wind-turbine inspection pipeline: tiling, detection, text mapping, "
               "diagnosis and evaluation"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON pipeline configuration");
    sub->add_option("--seed", opt.seed, "Seed for the synthetic detector");
    sub->add_option("--parallelism", opt.parallelism, "Worker threads")
        ->check(CLI::PositiveNumber);
  };

  auto* augment = app.add_subcommand("augment", "Multi-scale sliding-window tiling");
  common(augment);
  augment->add_option("--in", opt.in, "Image directory with label files");
  augment->add_option("--out", opt.out, "Output directory");
  augment->add_flag("--dry-run", opt.dry_run, "Print window counts without writing");

  auto* validate = app.add_subcommand("validate", "Check image/label pairs and copy them");
  validate->add_option("--in", opt.in, "Source directory")->required();
  validate->add_option("--out", opt.out, "Target directory")->required();
  validate->add_option("--seed", opt.seed, "Accepted for uniformity; unused");

  auto* detect = app.add_subcommand("detect", "Run the configured detector");
  common(detect);
  detect->add_option("--in", opt.in, "Image directory");
  detect->add_option("--out", opt.out, "Prediction output directory");
  detect->add_option("--pred", opt.pred, "Read predictions from this directory");

  auto* map = app.add_subcommand("map", "Detections to structured fault text");
  common(map);
  map->add_option("--in", opt.in, "Image directory");
  map->add_option("--pred", opt.pred, "Prediction directory (default: configured detector)");
  map->add_option("--out", opt.out, "Write <stem>.kv.json and <stem>.kv.txt here");

  auto* diagnose = app.add_subcommand("diagnose", "Full detection and two-stage diagnosis");
  common(diagnose);
  diagnose->add_option("--in", opt.in, "Image directory");
  diagnose->add_option("--out", opt.out, "Report output directory");
  diagnose->add_option("--pred", opt.pred, "Prediction directory (default: configured detector)");
  diagnose->add_flag("--stub", opt.stub, "Use the offline stub model");

  auto* evaluate = app.add_subcommand("evaluate", "Detection and report metrics");
  evaluate->add_option("--config", opt.config, "JSON pipeline configuration");
  evaluate->add_option("--pred", opt.pred, "Prediction label directory")->required();
  evaluate->add_option("--gt", opt.gt, "Ground-truth label directory")->required();
  evaluate->add_option("--in", opt.in, "Diagnose output directory for FCS/APS");
  evaluate->add_option("--out", opt.out, "Write eval.json here");
  evaluate->add_option("--seed", opt.seed, "Accepted for uniformity; unused");

  auto* ablate = app.add_subcommand("ablate", "Stage ablation table");
  common(ablate);
  ablate->add_option("--in", opt.in, "Image directory with label files");
  ablate->add_option("--out", opt.out, "Write ablation.json here");
  ablate->add_flag("--stub", opt.stub, "Use the offline stub model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (augment->parsed()) return cmd_augment(opt);
    if (validate->parsed()) return cmd_validate(opt);
    if (detect->parsed()) return cmd_detect(opt);
    if (map->parsed()) return cmd_map(opt);
    if (diagnose->parsed()) return cmd_diagnose(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (ablate->parsed()) return cmd_ablate(opt);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const wtdiag::ConfigError& e) {
    print_error(e.kind(), e.what());
    return kExitConfig;
  } catch (const wtdiag::Error& e) {
    print_error(e.kind(), e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
