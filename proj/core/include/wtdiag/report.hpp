#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace wtdiag {

struct ReportProvenance {
  std::string detector;  // provider tag, empty when the detector was off
  std::string stage1;    // transport/model tag, empty when the stage was off
  std::string stage2;
  std::string prompt_version;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
  // Report sections the advice text did not contain.
  std::vector<std::string> missing_sections;
};

// Per-fault texts are keyed by canonical class name; text not attributed to
// a class is stored under "general".
using PerFaultText = std::map<std::string, std::string>;

struct DiagnosticReport {
  std::vector<std::string> fault_types;  // canonical names or "unknown"
  PerFaultText severity;
  PerFaultText cause;
  PerFaultText maintenance;
  std::string raw_stage1;  // analysis text
  std::string raw_stage2;  // advice text
  ReportProvenance provenance;

  // Every section plus the analysis text, one block per line; the text that
  // report-quality scoring searches.
  std::string all_text() const;
};

inline constexpr std::string_view kGeneralKey = "general";

// Lenient: headers are found case-insensitively at line starts (markdown
// markers and numbering tolerated), missing sections are listed in
// provenance.missing_sections, and fault names are resolved through the
// class synonym table. Never throws.
DiagnosticReport parse_report(std::string_view stage2_text);

void to_json(nlohmann::json& j, const DiagnosticReport& r);
void from_json(const nlohmann::json& j, DiagnosticReport& r);

}  // namespace wtdiag
