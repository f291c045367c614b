#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/report.hpp"
#include "wtdiag/types.hpp"

namespace wtdiag {

inline constexpr double kMap50Iou = 0.5;

// Intersection over union; 0 for disjoint boxes or a zero union.
double iou(const BBox& a, const BBox& b);

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  // Detection has no enumerable negatives; fixed at 0 unless a caller
  // supplies a count, so accuracy reads TP / (TP + FP + FN).
  std::size_t tn = 0;
  // Per prediction, in input order: index of the matched ground truth.
  std::vector<std::optional<std::size_t>> assignment;
};

// Greedy: predictions in descending confidence (input order on ties) each
// take the unmatched same-class ground truth with the highest IoU, provided
// it reaches iou_threshold.
MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<Annotation>& gts,
                             double iou_threshold = kMap50Iou);

struct SummaryMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double accuracy = 0;
};

// Zero denominators give 0.
SummaryMetrics summary_metrics(const MatchResult& m);

// Predictions and ground truth of one image.
struct ImageEval {
  std::vector<Detection> preds;
  std::vector<Annotation> gts;
};

// All-point interpolated AP for one class over a set of images: predictions
// ranked by descending confidence across images, matched greedily within
// their image, precision envelope integrated over recall. 0 when the class
// has no ground truth.
double average_precision(std::span<const ImageEval> images, ClassId class_id,
                         double iou_threshold = kMap50Iou);
double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Annotation>& gts, ClassId class_id,
                         double iou_threshold = kMap50Iou);

// Unweighted mean of AP over the given classes that have ground truth.
// DomainError when none does.
double mean_ap(std::span<const ImageEval> images, const std::vector<ClassId>& classes,
               double iou_threshold = kMap50Iou);

// Fraction of detected classes that the text mentions by canonical name or
// synonym. DomainError for an empty class set.
double fcs(std::string_view report_text, const std::set<ClassId>& detected_classes);

// Expected report keywords per class.
struct KeywordSpec {
  std::map<ClassId, std::vector<std::string>> keywords;

  void validate() const;
};

KeywordSpec default_keyword_spec();
KeywordSpec parse_keyword_spec(std::string_view json_text);
KeywordSpec load_keyword_spec(const std::filesystem::path& path);

struct ScoredReport {
  DiagnosticReport report;
  std::set<ClassId> expected_classes;
};

struct ApsResult {
  double score = 0;  // mean over scored reports, 0 when none was scored
  std::vector<std::optional<double>> per_report;
  std::vector<std::size_t> skipped;  // reports with no expected keywords
};

// Per report: share of the expected classes' keywords found (case-insensitive,
// whole phrase) anywhere in the report.
ApsResult aps(const std::vector<ScoredReport>& reports, const KeywordSpec& spec);

struct EvalResult {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double accuracy = 0;
  std::map<ClassId, double> ap_per_class;  // classes with ground truth only
  double map50 = 0;
  std::optional<double> fcs;
  std::optional<double> aps;
};

// Detection metrics at IoU 0.5 over a dataset. mAP covers the four built-in
// classes that occur in the ground truth (0 when none occurs).
EvalResult evaluate_detections(std::span<const ImageEval> images);

void to_json(nlohmann::json& j, const EvalResult& r);
std::string format_table(const EvalResult& r);

}  // namespace wtdiag
