#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/types.hpp"

namespace wtdiag {

struct DetectionSet {
  ImageRecord image;
  std::vector<Detection> detections;
  std::string provider_tag;
};

enum class ProviderKind { kFile, kHttp, kSynthetic };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::kSynthetic;
  // Prediction directory for kFile, endpoint URL for kHttp.
  std::string location;
  double confidence_floor = 0.0;
  std::uint64_t noise_seed = 0;
  // Synthetic noise: probability of dropping each annotation and maximum
  // absolute per-corner displacement in pixels.
  double drop_rate = 0.0;
  double jitter_px = 0.0;
  int max_in_flight = 4;
  int timeout_ms = 30000;

  void validate() const;
};

// A source of detections for one image. Implementations are safe to call
// concurrently on distinct images.
class DetectionProvider {
 public:
  virtual ~DetectionProvider() = default;
  // Result never contains a detection below the configured confidence floor.
  virtual DetectionSet detect(const ImageRecord& image) = 0;
  virtual std::string tag() const = 0;
};

std::unique_ptr<DetectionProvider> make_provider(const ProviderConfig& config);

DetectionSet detect(const ImageRecord& image, const ProviderConfig& config);

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& s);

void to_json(nlohmann::json& j, const Detection& d);
void to_json(nlohmann::json& j, const DetectionSet& d);

}  // namespace wtdiag
