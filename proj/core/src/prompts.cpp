#include "wtdiag/prompts.hpp"

#include "base64.hpp"
#include "resources.hpp"
#include "wtdiag/error.hpp"

namespace fs = std::filesystem;

namespace wtdiag {

const PromptSet& default_prompts() {
  static const PromptSet prompts{detail::kPromptVersion, detail::kStage1System,
                                 detail::kStage1ImageOnlySystem,
                                 detail::kStage2System};
  return prompts;
}

PromptSet load_prompts(const fs::path& dir) {
  auto read = [&](const char* name) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw ConfigError("missing prompt file " + p.string());
    return read_text_file(p);
  };
  return {dir.filename().string(), read("stage1_system.txt"),
          read("stage1_image_only_system.txt"), read("stage2_system.txt")};
}

ChatRequest build_stage1_prompt(std::string_view kv_text,
                                const std::optional<Image>& image,
                                const ChatRequest& request_template,
                                const PromptSet& prompts) {
  if (kv_text.empty() && !image) {
    throw DomainError("stage 1 needs detector text or an image");
  }
  ChatRequest req = request_template;
  req.purpose = ChatPurpose::kAnalysis;
  req.messages.clear();
  const bool image_only = kv_text.empty();
  req.messages.push_back(
      {"system", {ContentPart::make_text(image_only ? prompts.stage1_image_only_system
                                                    : prompts.stage1_system)}});
  ChatMessage user{"user", {}};
  if (image) {
    user.parts.push_back(ContentPart::make_image(
        detail::base64_encode(encode_png(*image)), "image/png"));
  }
  if (!kv_text.empty()) user.parts.push_back(ContentPart::make_text(std::string(kv_text)));
  req.messages.push_back(std::move(user));
  return req;
}

ChatRequest build_stage2_prompt(std::string_view stage1_text,
                                const ChatRequest& request_template,
                                const PromptSet& prompts) {
  if (stage1_text.empty()) throw DomainError("stage 2 input text is empty");
  ChatRequest req = request_template;
  req.purpose = ChatPurpose::kAdvice;
  req.messages.clear();
  req.messages.push_back({"system", {ContentPart::make_text(prompts.stage2_system)}});
  req.messages.push_back({"user", {ContentPart::make_text(std::string(stage1_text))}});
  return req;
}

}  // namespace wtdiag
