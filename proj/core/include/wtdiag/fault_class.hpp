#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wtdiag/types.hpp"

namespace wtdiag {

struct FaultClass {
  ClassId id;
  std::string canonical_name;
  // Always contains canonical_name.
  std::vector<std::string> synonyms;
};

inline constexpr int kNumFaultClasses = 4;
inline constexpr std::string_view kUnknownFault = "unknown";

// The four built-in classes: 0 crack, 1 skin debonding, 2 surface blemish,
// 3 pitted surface.
std::span<const FaultClass> fault_classes();
const FaultClass& fault_class(ClassId id);
bool is_valid_class(ClassId id);
std::optional<ClassId> class_by_name(std::string_view name);

// Case-insensitive search for `phrase` in `text` where the match must not be
// glued to a surrounding letter or digit. Internal whitespace in the phrase
// matches any whitespace run.
bool contains_phrase(std::string_view text, std::string_view phrase);

// Classes whose canonical name or any synonym appears in `text`, ascending id.
std::vector<ClassId> mentioned_classes(std::string_view text);

std::string to_lower(std::string_view s);

}  // namespace wtdiag
