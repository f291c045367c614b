#pragma once

#include <string>
#include <string_view>

namespace wtdiag::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

// Throws ConfigError for URLs without an http or https scheme.
SplitUrl split_url(std::string_view url);

}  // namespace wtdiag::detail
