#include "wtdiag/fault_class.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "wtdiag/error.hpp"

namespace wtdiag {
namespace {

const std::array<FaultClass, kNumFaultClasses>& table() {
  static const std::array<FaultClass, kNumFaultClasses> classes = {{
      {0, "crack", {"crack", "cracks", "cracked", "cracking"}},
      {1,
       "skin debonding",
       {"skin debonding", "debonding", "debonded", "skin peeling",
        "delamination"}},
      {2, "surface blemish", {"surface blemish", "surface blemishes", "blemish",
                              "blemishes"}},
      {3, "pitted surface", {"pitted surface", "pitted surfaces", "pitting",
                             "pitted"}},
  }};
  return classes;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Lowercase and collapse whitespace runs to a single space.
std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool contains_normalized(const std::string& text, const std::string& phrase) {
  if (phrase.empty()) return false;
  for (std::size_t pos = text.find(phrase); pos != std::string::npos;
       pos = text.find(phrase, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t end = pos + phrase.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

std::span<const FaultClass> fault_classes() { return table(); }

bool is_valid_class(ClassId id) { return id >= 0 && id < kNumFaultClasses; }

const FaultClass& fault_class(ClassId id) {
  if (!is_valid_class(id)) {
    throw DomainError("class id " + std::to_string(id) + " outside 0-" +
                      std::to_string(kNumFaultClasses - 1));
  }
  return table()[static_cast<std::size_t>(id)];
}

std::optional<ClassId> class_by_name(std::string_view name) {
  const std::string key = normalize(name);
  for (const auto& fc : table()) {
    for (const auto& syn : fc.synonyms) {
      if (normalize(syn) == key) return fc.id;
    }
  }
  return std::nullopt;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
  return contains_normalized(normalize(text), normalize(phrase));
}

std::vector<ClassId> mentioned_classes(std::string_view text) {
  const std::string norm = normalize(text);
  std::vector<ClassId> out;
  for (const auto& fc : table()) {
    const bool hit = std::any_of(
        fc.synonyms.begin(), fc.synonyms.end(),
        [&](const std::string& syn) { return contains_normalized(norm, normalize(syn)); });
    if (hit) out.push_back(fc.id);
  }
  return out;
}

}  // namespace wtdiag
