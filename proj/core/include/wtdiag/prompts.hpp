#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "wtdiag/chat.hpp"
#include "wtdiag/image.hpp"

namespace wtdiag {

// System instructions for the two model stages. The defaults are compiled in
// from prompts/<version>/; a directory with the same three files overrides
// them.
struct PromptSet {
  std::string version;
  std::string stage1_system;
  std::string stage1_image_only_system;
  std::string stage2_system;
};

const PromptSet& default_prompts();
PromptSet load_prompts(const std::filesystem::path& dir);

// Report section headers, in report order.
inline constexpr std::string_view kSectionFaultType = "Fault type";
inline constexpr std::string_view kSectionSeverity = "Severity";
inline constexpr std::string_view kSectionCause = "Cause";
inline constexpr std::string_view kSectionMaintenance = "Maintenance recommendation";

// System message plus one user message holding the image part and then the
// detector summary text. With an empty kv_text the image-only instruction is
// used and the user message carries the image alone. Requires text or image.
ChatRequest build_stage1_prompt(std::string_view kv_text,
                                const std::optional<Image>& image,
                                const ChatRequest& request_template,
                                const PromptSet& prompts = default_prompts());

// System message naming the four report sections plus the analysis text as
// the user message, verbatim. Empty text is a DomainError.
ChatRequest build_stage2_prompt(std::string_view stage1_text,
                                const ChatRequest& request_template,
                                const PromptSet& prompts = default_prompts());

}  // namespace wtdiag
