#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/detector.hpp"
#include "wtdiag/types.hpp"

namespace wtdiag {

// Detection-to-text mapping. Class labels are the keys; the values are the
// class texts enriched with a frequency quantifier, the counts, and a
// large-area marker.

struct KvConfig {
  // Large-area threshold as a fraction of the image area.
  double area_threshold_fraction = 0.05;
  // Upper bounds (inclusive) of: no quantifier, "few", "some", "over half".
  // Above the last one the quantifier is "almost all".
  std::array<double, 4> quantifier_thresholds = {0.2, 0.4, 0.5, 0.8};

  void validate() const;
};

struct ClassFrequency {
  std::size_t count = 0;
  double frequency = 0;

  friend bool operator==(const ClassFrequency&, const ClassFrequency&) = default;
};

struct FaultEntry {
  ClassId class_id = 0;
  std::size_t count = 0;
  double frequency = 0;
  std::optional<std::string> quantifier;
  bool large_area = false;
  double max_box_area = 0;

  friend bool operator==(const FaultEntry&, const FaultEntry&) = default;
};

struct FaultSummary {
  std::size_t total = 0;
  // Descending frequency, ties broken by ascending class id.
  std::vector<FaultEntry> entries;

  friend bool operator==(const FaultSummary&, const FaultSummary&) = default;
};

std::map<ClassId, ClassFrequency> class_frequencies(
    const std::vector<Detection>& detections);
inline std::map<ClassId, ClassFrequency> class_frequencies(
    const DetectionSet& dset) {
  return class_frequencies(dset.detections);
}

std::optional<std::string> quantifier(double frequency,
                                      const KvConfig& config = {});

double box_area(const BBox& box);

// image_area must be positive; a class is large-area when its largest box
// exceeds area_threshold_fraction * image_area.
FaultSummary summarize(const std::vector<Detection>& detections,
                       double image_area, const KvConfig& config = {});
FaultSummary summarize(const DetectionSet& dset, const KvConfig& config = {});

inline constexpr const char* kNoFaultsText = "No faults detected.";

// "Detected faults: some crack (2 of 4), some pitted surface (2 of 4, large-area)."
std::string render_text(const FaultSummary& summary);

void to_json(nlohmann::json& j, const FaultSummary& s);
void from_json(const nlohmann::json& j, FaultSummary& s);

}  // namespace wtdiag
