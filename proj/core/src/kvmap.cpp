#include "wtdiag/kvmap.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"

namespace wtdiag {

void KvConfig::validate() const {
  if (!(area_threshold_fraction >= 0) || !std::isfinite(area_threshold_fraction)) {
    throw DomainError("area_threshold_fraction must be >= 0");
  }
  double prev = 0;
  for (double t : quantifier_thresholds) {
    if (!(t > prev) || t > 1) {
      throw DomainError("quantifier thresholds must be strictly increasing in (0,1]");
    }
    prev = t;
  }
}

std::map<ClassId, ClassFrequency> class_frequencies(
    const std::vector<Detection>& detections) {
  std::map<ClassId, ClassFrequency> out;
  for (const auto& d : detections) ++out[d.class_id].count;
  const double total = static_cast<double>(detections.size());
  for (auto& [cls, f] : out) f.frequency = static_cast<double>(f.count) / total;
  return out;
}

std::optional<std::string> quantifier(double frequency, const KvConfig& config) {
  const auto& t = config.quantifier_thresholds;
  if (frequency <= t[0]) return std::nullopt;
  if (frequency <= t[1]) return "few";
  if (frequency <= t[2]) return "some";
  if (frequency <= t[3]) return "over half";
  return "almost all";
}

double box_area(const BBox& box) {
  return std::abs(box.x2 - box.x1) * std::abs(box.y2 - box.y1);
}

FaultSummary summarize(const std::vector<Detection>& detections,
                       double image_area, const KvConfig& config) {
  config.validate();
  if (!(image_area > 0)) throw DomainError("image_area must be positive");
  const double threshold = config.area_threshold_fraction * image_area;

  FaultSummary summary;
  summary.total = detections.size();
  std::map<ClassId, double> max_area;
  for (const auto& d : detections) {
    double& m = max_area[d.class_id];
    m = std::max(m, box_area(d.box));
  }
  for (const auto& [cls, f] : class_frequencies(detections)) {
    FaultEntry e;
    e.class_id = cls;
    e.count = f.count;
    e.frequency = f.frequency;
    e.quantifier = quantifier(f.frequency, config);
    e.max_box_area = max_area[cls];
    e.large_area = e.max_box_area > threshold;
    summary.entries.push_back(std::move(e));
  }
  std::stable_sort(summary.entries.begin(), summary.entries.end(),
                   [](const FaultEntry& a, const FaultEntry& b) {
                     if (a.frequency != b.frequency) return a.frequency > b.frequency;
                     return a.class_id < b.class_id;
                   });
  return summary;
}

FaultSummary summarize(const DetectionSet& dset, const KvConfig& config) {
  return summarize(dset.detections,
                   static_cast<double>(dset.image.width) * dset.image.height,
                   config);
}

std::string render_text(const FaultSummary& summary) {
  if (summary.entries.empty()) return kNoFaultsText;
  std::string out = "Detected faults: ";
  bool first = true;
  for (const auto& e : summary.entries) {
    if (!first) out += ", ";
    first = false;
    if (e.quantifier) out += *e.quantifier + " ";
    out += fault_class(e.class_id).canonical_name;
    out += " (" + std::to_string(e.count) + " of " + std::to_string(summary.total);
    if (e.large_area) out += ", large-area";
    out += ")";
  }
  out += ".";
  return out;
}

void to_json(nlohmann::json& j, const FaultSummary& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"class_id", e.class_id},
                       {"class_name", fault_class(e.class_id).canonical_name},
                       {"count", e.count},
                       {"frequency", e.frequency},
                       {"quantifier", e.quantifier ? nlohmann::json(*e.quantifier)
                                                   : nlohmann::json(nullptr)},
                       {"large_area", e.large_area},
                       {"max_box_area", e.max_box_area}});
  }
  j = nlohmann::json{{"total", s.total}, {"entries", std::move(entries)}};
}

void from_json(const nlohmann::json& j, FaultSummary& s) {
  s = {};
  s.total = j.at("total").get<std::size_t>();
  for (const auto& item : j.at("entries")) {
    FaultEntry e;
    e.class_id = item.at("class_id").get<int>();
    e.count = item.at("count").get<std::size_t>();
    e.frequency = item.at("frequency").get<double>();
    if (!item.at("quantifier").is_null()) {
      e.quantifier = item.at("quantifier").get<std::string>();
    }
    e.large_area = item.at("large_area").get<bool>();
    e.max_box_area = item.at("max_box_area").get<double>();
    s.entries.push_back(std::move(e));
  }
}

}  // namespace wtdiag
