#pragma once

namespace wtdiag::detail {

extern const char* const kPromptVersion;
extern const char* const kStage1System;
extern const char* const kStage1ImageOnlySystem;
extern const char* const kStage2System;
extern const char* const kDefaultKeywords;

}  // namespace wtdiag::detail
