#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/kvmap.hpp"

using namespace wtdiag;

namespace {

Detection det(ClassId c, double x1, double y1, double x2, double y2) {
  return {c, {x1, y1, x2, y2}, 1.0};
}

}  // namespace

TEST(Frequencies, Examples) {
  const std::vector<Detection> d{det(0, 0, 0, 1, 1), det(0, 0, 0, 1, 1), det(3, 0, 0, 1, 1),
                                 det(3, 0, 0, 1, 1)};
  const auto f = class_frequencies(d);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.at(0), (ClassFrequency{2, 0.5}));
  EXPECT_EQ(f.at(3), (ClassFrequency{2, 0.5}));
  EXPECT_EQ(class_frequencies({det(2, 0, 0, 1, 1)}).at(2).frequency, 1.0);
  EXPECT_TRUE(class_frequencies(std::vector<Detection>{}).empty());
}

TEST(Quantifier, Examples) {
  EXPECT_EQ(quantifier(0.3), "few");
  EXPECT_EQ(quantifier(0.8), "over half");
  EXPECT_EQ(quantifier(0.800001), "almost all");
  EXPECT_EQ(quantifier(0.1), std::nullopt);
}

TEST(Quantifier, BoundariesExact) {
  const double e = std::nextafter(1.0, 2.0) - 1.0;
  EXPECT_EQ(quantifier(0.2), std::nullopt);
  EXPECT_EQ(quantifier(std::nextafter(0.2, 1.0)), "few");
  EXPECT_EQ(quantifier(0.4), "few");
  EXPECT_EQ(quantifier(std::nextafter(0.4, 1.0)), "some");
  EXPECT_EQ(quantifier(0.5), "some");
  EXPECT_EQ(quantifier(0.5 + e), "over half");
  EXPECT_EQ(quantifier(0.8), "over half");
  EXPECT_EQ(quantifier(std::nextafter(0.8, 1.0)), "almost all");
  EXPECT_EQ(quantifier(1.0), "almost all");
  EXPECT_EQ(quantifier(0.0), std::nullopt);
}

TEST(BoxArea, Examples) {
  EXPECT_EQ(box_area({10, 20, 110, 220}), 20000);
  EXPECT_EQ(box_area({0, 0, 1, 1}), 1);
  EXPECT_EQ(box_area({11, 21, 111, 221}), box_area({10, 20, 110, 220}));
}

TEST(Summarize, LargeAreaFlag) {
  const std::vector<Detection> d{det(0, 0, 0, 300, 300), det(0, 500, 500, 510, 510),
                                 det(3, 0, 0, 10, 10), det(3, 20, 20, 30, 30)};
  const auto s = summarize(d, 1000.0 * 1000.0);
  EXPECT_EQ(s.total, 4u);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].class_id, 0);
  EXPECT_TRUE(s.entries[0].large_area);
  EXPECT_EQ(s.entries[0].max_box_area, 90000);
  EXPECT_FALSE(s.entries[1].large_area);
}

TEST(Summarize, ThresholdIsStrict) {
  // 0.05 * 100*100 = 500; a 500 px box is not large
  const auto s = summarize({det(1, 0, 0, 50, 10)}, 100.0 * 100.0);
  EXPECT_FALSE(s.entries[0].large_area);
  EXPECT_TRUE(summarize({det(1, 0, 0, 50, 10.5)}, 100.0 * 100.0).entries[0].large_area);
}

TEST(Summarize, EmptyAndTinyBoxes) {
  const auto e = summarize(std::vector<Detection>{}, 100);
  EXPECT_EQ(e.total, 0u);
  EXPECT_TRUE(e.entries.empty());
  const auto t = summarize({det(0, 0, 0, 1, 1), det(2, 5, 5, 6, 6)}, 1e6);
  for (const auto& en : t.entries) EXPECT_FALSE(en.large_area);
}

TEST(Summarize, OrderDescendingFrequencyThenClass) {
  const auto s = summarize({det(3, 0, 0, 1, 1), det(1, 0, 0, 1, 1), det(2, 0, 0, 1, 1),
                            det(2, 0, 0, 1, 1)},
                           100);
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.entries[0].class_id, 2);
  EXPECT_EQ(s.entries[1].class_id, 1);
  EXPECT_EQ(s.entries[2].class_id, 3);
}

TEST(RenderText, Examples) {
  const std::vector<Detection> d{det(0, 0, 0, 1, 1), det(0, 0, 0, 1, 1), det(3, 0, 0, 1, 1),
                                 det(3, 0, 0, 1, 1)};
  const auto s = summarize(d, 1e6);
  EXPECT_EQ(render_text(s), "Detected faults: some crack (2 of 4), some pitted surface (2 of 4).");
  EXPECT_EQ(render_text(FaultSummary{}), "No faults detected.");
  EXPECT_EQ(render_text(s), render_text(summarize(d, 1e6)));
}

TEST(RenderText, NoQuantifierAndLargeArea) {
  std::vector<Detection> d(9, det(1, 0, 0, 2, 2));
  d.push_back(det(2, 0, 0, 50, 50));
  EXPECT_EQ(render_text(summarize(d, 100.0 * 100.0)),
            "Detected faults: almost all skin debonding (9 of 10), "
            "surface blemish (1 of 10, large-area).");
}

TEST(KvProperty, FrequenciesSumToOne) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 60)(rng);
    std::vector<Detection> d;
    for (int i = 0; i < n; ++i) d.push_back(det(int(rng() % 4), 0, 0, 1, 1));
    const auto s = summarize(d, 100);
    double sum = 0;
    std::size_t count = 0;
    for (const auto& e : s.entries) {
      EXPECT_GT(e.frequency, 0);
      EXPECT_LE(e.frequency, 1);
      sum += e.frequency;
      count += e.count;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_EQ(count, s.total);
  }
}

TEST(KvProperty, RenderTextInjectiveOnClassCountFlag) {
  // distinct (class, count, large-area) multisets must give distinct text
  std::set<std::string> texts;
  std::size_t summaries = 0;
  for (int a = 0; a <= 3; ++a) {
    for (int b = 0; b <= 3; ++b) {
      for (int big = 0; big < 4; ++big) {
        std::vector<Detection> d;
        for (int i = 0; i < a; ++i) d.push_back(det(0, 0, 0, (big & 1) ? 50 : 1, 1 + 49 * (big & 1)));
        for (int i = 0; i < b; ++i) d.push_back(det(3, 0, 0, (big & 2) ? 50 : 1, 1 + 49 * (big & 2) / 2));
        if ((a == 0 && (big & 1)) || (b == 0 && (big & 2))) continue;
        texts.insert(render_text(summarize(d, 100.0 * 100.0)));
        ++summaries;
      }
    }
  }
  EXPECT_EQ(texts.size(), summaries);
}

TEST(KvJson, RoundTrip) {
  const auto s = summarize({det(0, 0, 0, 300, 300), det(2, 0, 0, 3, 3)}, 1e6);
  const nlohmann::json j = s;
  EXPECT_EQ(j.get<FaultSummary>(), s);
}

TEST(KvConfig, Validation) {
  KvConfig c;
  EXPECT_NO_THROW(c.validate());
  c.quantifier_thresholds = {0.2, 0.5, 0.4, 0.8};
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.quantifier_thresholds = {0.0, 0.4, 0.5, 0.8};
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.area_threshold_fraction = -0.1;
  EXPECT_THROW(c.validate(), DomainError);
}
