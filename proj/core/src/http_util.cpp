#include "http_util.hpp"

#include "wtdiag/error.hpp"

namespace wtdiag::detail {

SplitUrl split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ConfigError("URL without scheme: " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) {
    return {std::string(url), "/"};
  }
  if (path_start == scheme_end + 3) {
    throw ConfigError("URL without host: " + std::string(url));
  }
  return {std::string(url.substr(0, path_start)),
          std::string(url.substr(path_start))};
}

}  // namespace wtdiag::detail
