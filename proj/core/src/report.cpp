#include "wtdiag/report.hpp"

#include <array>
#include <cctype>
#include <optional>

#include <nlohmann/json.hpp>

#include "wtdiag/fault_class.hpp"
#include "wtdiag/prompts.hpp"

namespace wtdiag {
namespace {

enum Section { kFaultType = 0, kSeverity, kCause, kMaintenance, kSectionCount };

constexpr std::array<std::string_view, kSectionCount> kSectionNames = {
    kSectionFaultType, kSectionSeverity, kSectionCause, kSectionMaintenance};

// Longest aliases first so "fault severity" wins over shorter prefixes.
struct Alias {
  std::string_view text;
  Section section;
};
constexpr std::array<Alias, 14> kAliases = {{
    {"maintenance recommendations", kMaintenance},
    {"maintenance recommendation", kMaintenance},
    {"fault generation cause", kCause},
    {"maintenance advice", kMaintenance},
    {"fault categories", kFaultType},
    {"fault category", kFaultType},
    {"fault severity", kSeverity},
    {"cause analysis", kCause},
    {"fault types", kFaultType},
    {"fault type", kFaultType},
    {"maintenance", kMaintenance},
    {"severity", kSeverity},
    {"causes", kCause},
    {"cause", kCause},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_markers(std::string_view s) {
  s = trim(s);
  while (!s.empty() && (s.front() == '#' || s.front() == '*' || s.front() == '-' ||
                        s.front() == '_' || s.front() == '>')) {
    s.remove_prefix(1);
    s = trim(s);
  }
  // "1." / "2)" numbering
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) s = trim(s.substr(i + 1));
  return s;
}

// Header match: alias at line start, then optional markdown emphasis, then a
// colon or end of line. Returns the section and the remainder of the line.
std::optional<std::pair<Section, std::string_view>> match_header(std::string_view line) {
  const std::string_view body = strip_markers(line);
  const std::string lower = to_lower(body);
  for (const auto& alias : kAliases) {
    if (lower.compare(0, alias.text.size(), alias.text) != 0) continue;
    std::string_view rest = body.substr(alias.text.size());
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    rest = trim(rest);
    if (rest.empty()) return std::make_pair(alias.section, rest);
    if (rest.front() != ':') continue;
    rest.remove_prefix(1);
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    return std::make_pair(alias.section, trim(rest));
  }
  return std::nullopt;
}

void append_line(std::string& dst, std::string_view text) {
  if (text.empty()) return;
  if (!dst.empty()) dst += ' ';
  dst += text;
}

PerFaultText split_per_fault(const std::vector<std::string>& lines) {
  PerFaultText out;
  for (const auto& raw : lines) {
    const std::string_view line = strip_markers(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon != std::string_view::npos) {
      const std::string_view key = trim(line.substr(0, colon));
      const std::string_view value = trim(line.substr(colon + 1));
      if (auto cls = class_by_name(key)) {
        append_line(out[fault_class(*cls).canonical_name], value);
        continue;
      }
      if (to_lower(key) == kUnknownFault) {
        append_line(out[std::string(kUnknownFault)], value);
        continue;
      }
    }
    append_line(out[std::string(kGeneralKey)], line);
  }
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (trim(l).empty()) continue;
    if (!out.empty()) out += '\n';
    out += trim(l);
  }
  return out;
}

void append_block(std::string& out, const PerFaultText& m) {
  for (const auto& [k, v] : m) {
    out += k + ": " + v + '\n';
  }
}

}  // namespace

std::string DiagnosticReport::all_text() const {
  std::string out;
  for (const auto& f : fault_types) out += f + '\n';
  append_block(out, severity);
  append_block(out, cause);
  append_block(out, maintenance);
  out += raw_stage1;
  out += '\n';
  return out;
}

DiagnosticReport parse_report(std::string_view stage2_text) {
  DiagnosticReport report;
  report.raw_stage2 = std::string(stage2_text);

  std::array<std::optional<std::vector<std::string>>, kSectionCount> sections;
  std::optional<Section> current;
  std::size_t pos = 0;
  while (pos <= stage2_text.size()) {
    const std::size_t nl = stage2_text.find('\n', pos);
    const std::string_view line = stage2_text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (auto header = match_header(line)) {
      current = header->first;
      auto& lines = sections[current.value()];
      if (!lines) lines.emplace();
      if (!header->second.empty()) lines->emplace_back(header->second);
    } else if (current) {
      sections[current.value()]->emplace_back(line);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  for (int s = 0; s < kSectionCount; ++s) {
    if (!sections[s]) {
      report.provenance.missing_sections.emplace_back(kSectionNames[s]);
    }
  }
  if (sections[kFaultType]) {
    const std::string text = join(*sections[kFaultType]);
    for (ClassId c : mentioned_classes(text)) {
      report.fault_types.push_back(fault_class(c).canonical_name);
    }
    if (report.fault_types.empty()) {
      report.fault_types.emplace_back(kUnknownFault);
    }
  }
  if (sections[kSeverity]) report.severity = split_per_fault(*sections[kSeverity]);
  if (sections[kCause]) report.cause = split_per_fault(*sections[kCause]);
  if (sections[kMaintenance]) {
    report.maintenance = split_per_fault(*sections[kMaintenance]);
  }
  return report;
}

void to_json(nlohmann::json& j, const DiagnosticReport& r) {
  j = nlohmann::json{
      {"fault_types", r.fault_types},
      {"severity", r.severity},
      {"cause", r.cause},
      {"maintenance", r.maintenance},
      {"raw_stage1", r.raw_stage1},
      {"raw_stage2", r.raw_stage2},
      {"provenance",
       {{"detector", r.provenance.detector},
        {"stage1", r.provenance.stage1},
        {"stage2", r.provenance.stage2},
        {"prompt_version", r.provenance.prompt_version},
        {"started_at", r.provenance.started_at},
        {"finished_at", r.provenance.finished_at},
        {"missing_sections", r.provenance.missing_sections}}}};
}

void from_json(const nlohmann::json& j, DiagnosticReport& r) {
  r = {};
  j.at("fault_types").get_to(r.fault_types);
  j.at("severity").get_to(r.severity);
  j.at("cause").get_to(r.cause);
  j.at("maintenance").get_to(r.maintenance);
  j.at("raw_stage1").get_to(r.raw_stage1);
  j.at("raw_stage2").get_to(r.raw_stage2);
  const auto& p = j.at("provenance");
  p.at("detector").get_to(r.provenance.detector);
  p.at("stage1").get_to(r.provenance.stage1);
  p.at("stage2").get_to(r.provenance.stage2);
  p.at("prompt_version").get_to(r.provenance.prompt_version);
  p.at("started_at").get_to(r.provenance.started_at);
  p.at("finished_at").get_to(r.provenance.finished_at);
  p.at("missing_sections").get_to(r.provenance.missing_sections);
}

}  // namespace wtdiag
