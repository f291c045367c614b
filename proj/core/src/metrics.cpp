#include "wtdiag/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "resources.hpp"
#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/image.hpp"

namespace wtdiag {

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

std::vector<std::size_t> confidence_order(const std::vector<Detection>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });
  return order;
}

// Highest-IoU unmatched ground truth of the same class at or above the
// threshold; lowest index on ties.
std::optional<std::size_t> best_match(const Detection& p,
                                      const std::vector<Annotation>& gts,
                                      const std::vector<bool>& taken,
                                      double threshold) {
  std::optional<std::size_t> best;
  double best_iou = -1;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (taken[g] || gts[g].class_id != p.class_id) continue;
    const double v = iou(p.box, gts[g].box);
    if (v >= threshold && v > best_iou) {
      best = g;
      best_iou = v;
    }
  }
  return best;
}

double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

MatchResult match_detections(const std::vector<Detection>& preds,
                             const std::vector<Annotation>& gts,
                             double iou_threshold) {
  MatchResult m;
  m.assignment.assign(preds.size(), std::nullopt);
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t i : confidence_order(preds)) {
    if (auto g = best_match(preds[i], gts, taken, iou_threshold)) {
      taken[*g] = true;
      m.assignment[i] = g;
      ++m.tp;
    } else {
      ++m.fp;
    }
  }
  m.fn = gts.size() - m.tp;
  return m;
}

SummaryMetrics summary_metrics(const MatchResult& m) {
  const double tp = static_cast<double>(m.tp);
  SummaryMetrics s;
  s.precision = safe_div(tp, tp + static_cast<double>(m.fp));
  s.recall = safe_div(tp, tp + static_cast<double>(m.fn));
  s.f1 = safe_div(2 * s.precision * s.recall, s.precision + s.recall);
  s.accuracy = safe_div(tp + static_cast<double>(m.tn),
                        static_cast<double>(m.tp + m.fp + m.fn + m.tn));
  return s;
}

double average_precision(std::span<const ImageEval> images, ClassId class_id,
                         double iou_threshold) {
  struct Ranked {
    double confidence;
    std::size_t image;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  std::vector<std::vector<Annotation>> gts(images.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& g : images[i].gts) {
      if (g.class_id == class_id) gts[i].push_back(g);
    }
    positives += gts[i].size();
    for (std::size_t p = 0; p < images[i].preds.size(); ++p) {
      if (images[i].preds[p].class_id == class_id) {
        ranked.push_back({images[i].preds[p].confidence, i, p});
      }
    }
  }
  if (positives == 0) return 0.0;
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.confidence > b.confidence;
  });

  std::vector<std::vector<bool>> taken(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) taken[i].assign(gts[i].size(), false);

  std::vector<double> precision, recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const auto& r = ranked[k];
    const Detection& pred = images[r.image].preds[r.index];
    if (auto g = best_match(pred, gts[r.image], taken[r.image], iou_threshold)) {
      taken[r.image][*g] = true;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  // Precision envelope: best precision at any equal or higher recall.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0;
  double prev_recall = 0;
  for (std::size_t k = 0; k < recall.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Annotation>& gts, ClassId class_id,
                         double iou_threshold) {
  const ImageEval one{preds, gts};
  return average_precision(std::span<const ImageEval>(&one, 1), class_id,
                           iou_threshold);
}

double mean_ap(std::span<const ImageEval> images, const std::vector<ClassId>& classes,
               double iou_threshold) {
  std::set<ClassId> with_gt;
  for (const auto& img : images) {
    for (const auto& g : img.gts) with_gt.insert(g.class_id);
  }
  double sum = 0;
  std::size_t n = 0;
  for (ClassId c : std::set<ClassId>(classes.begin(), classes.end())) {
    if (!with_gt.count(c)) continue;
    sum += average_precision(images, c, iou_threshold);
    ++n;
  }
  if (n == 0) throw DomainError("no class has ground truth; mAP undefined");
  return sum / static_cast<double>(n);
}

double fcs(std::string_view report_text, const std::set<ClassId>& detected_classes) {
  if (detected_classes.empty()) {
    throw DomainError("no detected classes; consistency score undefined");
  }
  const auto mentioned = mentioned_classes(report_text);
  std::size_t matched = 0;
  for (ClassId c : detected_classes) {
    if (std::find(mentioned.begin(), mentioned.end(), c) != mentioned.end()) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(detected_classes.size());
}

void KeywordSpec::validate() const {
  for (const auto& [cls, words] : keywords) {
    fault_class(cls);
    if (words.empty()) {
      throw DomainError("keyword list for " + fault_class(cls).canonical_name +
                        " is empty");
    }
  }
}

KeywordSpec parse_keyword_spec(std::string_view json_text) {
  KeywordSpec spec;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw ConfigError("keyword spec must be a JSON object");
    for (const auto& [name, words] : j.items()) {
      const auto cls = class_by_name(name);
      if (!cls) throw ConfigError("keyword spec names unknown class '" + name + "'");
      spec.keywords[*cls] = words.get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid keyword spec: ") + e.what());
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

KeywordSpec default_keyword_spec() { return parse_keyword_spec(detail::kDefaultKeywords); }

KeywordSpec load_keyword_spec(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("keyword spec not found: " + path.string());
  }
  return parse_keyword_spec(read_text_file(path));
}

ApsResult aps(const std::vector<ScoredReport>& reports, const KeywordSpec& spec) {
  ApsResult out;
  double sum = 0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::set<std::string> expected;
    for (ClassId c : reports[i].expected_classes) {
      auto it = spec.keywords.find(c);
      if (it == spec.keywords.end()) continue;
      for (const auto& kw : it->second) expected.insert(to_lower(kw));
    }
    if (expected.empty()) {
      out.per_report.push_back(std::nullopt);
      out.skipped.push_back(i);
      continue;
    }
    const std::string text = reports[i].report.all_text();
    const auto hits = std::count_if(expected.begin(), expected.end(),
                                    [&](const std::string& kw) { return contains_phrase(text, kw); });
    const double score = static_cast<double>(hits) / static_cast<double>(expected.size());
    out.per_report.push_back(score);
    sum += score;
    ++scored;
  }
  out.score = scored ? sum / static_cast<double>(scored) : 0.0;
  return out;
}

EvalResult evaluate_detections(std::span<const ImageEval> images) {
  EvalResult r;
  for (const auto& img : images) {
    const MatchResult m = match_detections(img.preds, img.gts, kMap50Iou);
    r.tp += m.tp;
    r.fp += m.fp;
    r.fn += m.fn;
  }
  MatchResult total;
  total.tp = r.tp;
  total.fp = r.fp;
  total.fn = r.fn;
  const SummaryMetrics s = summary_metrics(total);
  r.precision = s.precision;
  r.recall = s.recall;
  r.f1 = s.f1;
  r.accuracy = s.accuracy;

  std::set<ClassId> with_gt;
  for (const auto& img : images) {
    for (const auto& g : img.gts) with_gt.insert(g.class_id);
  }
  for (ClassId c : with_gt) r.ap_per_class[c] = average_precision(images, c, kMap50Iou);
  if (!with_gt.empty()) {
    double sum = 0;
    for (const auto& [c, ap] : r.ap_per_class) sum += ap;
    r.map50 = sum / static_cast<double>(r.ap_per_class.size());
  }
  return r;
}

void to_json(nlohmann::json& j, const EvalResult& r) {
  nlohmann::json ap = nlohmann::json::object();
  for (const auto& [c, v] : r.ap_per_class) ap[fault_class(c).canonical_name] = v;
  j = nlohmann::json{{"tp", r.tp},
                     {"fp", r.fp},
                     {"fn", r.fn},
                     {"tn", r.tn},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"f1", r.f1},
                     {"detection_accuracy", r.accuracy},
                     {"ap_per_class", ap},
                     {"map50", r.map50},
                     {"fcs", r.fcs ? nlohmann::json(*r.fcs) : nlohmann::json(nullptr)},
                     {"aps", r.aps ? nlohmann::json(*r.aps) : nlohmann::json(nullptr)}};
}

std::string format_table(const EvalResult& r) {
  std::string out;
  char buf[160];
  auto row = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof(buf), "%-24s %8.4f\n", name.c_str(), v);
    out += buf;
  };
  std::snprintf(buf, sizeof(buf), "%-24s %8s\n", "metric", "value");
  out += buf;
  row("precision", r.precision);
  row("recall", r.recall);
  row("f1", r.f1);
  row("detection accuracy", r.accuracy);
  for (const auto& [c, v] : r.ap_per_class) row("AP " + fault_class(c).canonical_name, v);
  row("mAP50", r.map50);
  if (r.fcs) row("FCS", *r.fcs);
  if (r.aps) row("APS", *r.aps);
  std::snprintf(buf, sizeof(buf), "%-24s %zu/%zu/%zu\n", "TP/FP/FN", r.tp, r.fp, r.fn);
  out += buf;
  return out;
}

}  // namespace wtdiag
