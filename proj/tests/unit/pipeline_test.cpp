#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "wtdiag/ablation.hpp"
#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/pipeline.hpp"

using namespace wtdiag;
using wtdiag::fixtures::TempDir;

namespace {

struct Rig {
  TempDir dir;
  std::vector<ImageRecord> records;
  std::unique_ptr<DetectionProvider> detector = make_provider(ProviderConfig{});
  StubTransport stage1, stage2;
  PipelineContext ctx;

  explicit Rig(int count = 2) {
    records = fixtures::write_fixture(dir.path(), {.count = count, .width = 160, .height = 120, .boxes_per_image = 4, .min_box = 8, .max_box = 40});
    ctx.detector = detector.get();
    ctx.stage1 = &stage1;
    ctx.stage2 = &stage2;
    ctx.clock = fixed_clock("2000-01-01T00:00:00Z");
  }

  PipelineResult run(StageToggles t, std::size_t i = 0) {
    StageConfig sc;
    sc.toggles = t;
    return run_pipeline(records[i], ctx, sc);
  }
};

class FailingTransport : public ChatTransport {
 public:
  std::string complete(const ChatRequest&) override { throw TransportError("down", 503); }
  std::string tag() const override { return "failing"; }
};

}  // namespace

TEST(Pipeline, AllStagesPresent) {
  Rig rig;
  const auto r = rig.run({true, true, true});
  EXPECT_EQ(r.categories, (OutputCategories{true, true, true}));
  EXPECT_EQ(r.report.fault_types,
            (std::vector<std::string>{"crack", "skin debonding", "surface blemish", "pitted surface"}));
  EXPECT_EQ(r.report.maintenance.size(), 4u);
  ASSERT_TRUE(r.stage1_image);
  EXPECT_EQ(r.report.provenance.stage1, "stub");
  EXPECT_EQ(r.report.provenance.detector, "synthetic:seed=0");
  EXPECT_EQ(r.report.provenance.started_at, "2000-01-01T00:00:00Z");
}

TEST(Pipeline, StageOneOff) {
  Rig rig;
  const auto r = rig.run({true, false, true});
  EXPECT_EQ(r.categories, (OutputCategories{true, false, true}));
  EXPECT_TRUE(r.report.raw_stage1.empty());
  EXPECT_FALSE(r.stage1_image);
}

TEST(Pipeline, StageTwoOff) {
  Rig rig;
  const auto r = rig.run({true, true, false});
  EXPECT_EQ(r.categories, (OutputCategories{true, true, false}));
  EXPECT_TRUE(r.report.maintenance.empty());
  EXPECT_EQ(r.report.fault_types.size(), 4u);
}

TEST(Pipeline, DetectorOffSendsRawImageWithoutText) {
  Rig rig;
  const auto r = rig.run({false, true, true});
  EXPECT_EQ(r.categories, (OutputCategories{false, true, true}));
  EXPECT_TRUE(r.kv_text.empty());
  ASSERT_TRUE(r.stage1_image);
  EXPECT_EQ(*r.stage1_image, load_image(rig.records[0].path));
  EXPECT_EQ(r.report.fault_types, std::vector<std::string>{"unknown"});
}

TEST(Pipeline, StubRoundTripRecoversInjectedClasses) {
  Rig rig;
  StubTransport suppress({1});
  rig.ctx.stage1 = &suppress;
  const auto r = rig.run({true, true, true});
  EXPECT_EQ(r.report.fault_types,
            (std::vector<std::string>{"crack", "surface blemish", "pitted surface"}));
}

TEST(Pipeline, InvalidToggles) {
  Rig rig;
  EXPECT_THROW(rig.run({false, false, false}), DomainError);
  EXPECT_THROW(rig.run({false, false, true}), DomainError);
}

TEST(Pipeline, ErrorsCarryStage) {
  Rig rig;
  FailingTransport bad;
  rig.ctx.stage2 = &bad;
  try {
    rig.run({true, true, true});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "stage2");
    EXPECT_EQ(e.cause_kind(), "transport");
  }
  rig.ctx.stage2 = &rig.stage2;
  ProviderConfig missing{ProviderKind::kFile, (rig.dir / "nope").string()};
  auto file = make_provider(missing);
  rig.ctx.detector = file.get();
  try {
    rig.run({true, true, true});
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "detector");
    EXPECT_EQ(e.cause_kind(), "not_found");
  }
}

TEST(Pipeline, ByteDeterministic) {
  Rig rig;
  ProviderConfig noisy;
  noisy.noise_seed = 7;
  noisy.drop_rate = 0.3;
  noisy.jitter_px = 3;
  auto det = make_provider(noisy);
  rig.ctx.detector = det.get();
  const auto a = nlohmann::json(rig.run({true, true, true}, 1)).dump();
  const auto b = nlohmann::json(rig.run({true, true, true}, 1)).dump();
  EXPECT_EQ(a, b);
}

TEST(Ablation, MatrixAndOrdering) {
  Rig rig(3);
  AblationInputs in;
  in.detector = rig.detector.get();
  in.stage1 = &rig.stage1;
  in.stage2 = &rig.stage2;
  in.clock = fixed_clock("t");
  const auto t = run_ablation(rig.records, in);
  ASSERT_EQ(t.rows.size(), 4u);
  const std::array<OutputCategories, 4> expected{{
      {true, false, true}, {true, true, false}, {false, true, true}, {true, true, true}}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.rows[i].categories, expected[i]) << t.rows[i].variant.name;
    EXPECT_EQ(t.rows[i].images_ok, 3u);
  }
  const double full = t.rows[3].aps;
  EXPECT_DOUBLE_EQ(full, 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(t.rows[i].aps, full);
}

TEST(Ablation, ParallelMatchesSerial) {
  Rig rig(2);
  AblationInputs in;
  in.detector = rig.detector.get();
  in.stage1 = &rig.stage1;
  in.stage2 = &rig.stage2;
  in.clock = fixed_clock("t");
  const auto serial = nlohmann::json(run_ablation(rig.records, in)).dump();
  in.parallelism = 4;
  EXPECT_EQ(nlohmann::json(run_ablation(rig.records, in)).dump(), serial);
}

TEST(Ablation, EmptyDatasetAndPerCellErrors) {
  Rig rig(2);
  AblationInputs in;
  in.detector = rig.detector.get();
  in.stage1 = &rig.stage1;
  in.stage2 = &rig.stage2;
  EXPECT_TRUE(run_ablation({}, in).rows.empty());

  FailingTransport bad;
  in.stage2 = &bad;
  const auto t = run_ablation(rig.records, in);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[1].images_ok, 2u);  // detector+analysis never calls stage 2
  EXPECT_TRUE(t.rows[1].errors.empty());
  EXPECT_EQ(t.rows[0].errors.size(), 2u);
  EXPECT_FALSE(format_table(t).empty());
}
