#include "wtdiag/detector.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <semaphore>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "base64.hpp"
#include "http_util.hpp"
#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/image.hpp"
#include "wtdiag/label_io.hpp"

namespace fs = std::filesystem;

namespace wtdiag {
namespace {

std::vector<Detection> apply_floor(std::vector<Detection> dets, double floor) {
  std::erase_if(dets, [&](const Detection& d) { return d.confidence < floor; });
  return dets;
}

class FileProvider final : public DetectionProvider {
 public:
  explicit FileProvider(ProviderConfig config) : config_(std::move(config)) {}

  DetectionSet detect(const ImageRecord& image) override {
    const fs::path file = fs::path(config_.location) / (image.stem() + ".txt");
    if (!fs::exists(file)) {
      throw NotFoundError("no prediction file " + file.string());
    }
    auto dets =
        parse_prediction_file(read_text_file(file), image.width, image.height);
    return {image, apply_floor(std::move(dets), config_.confidence_floor), tag()};
  }

  std::string tag() const override { return "file:" + config_.location; }

 private:
  ProviderConfig config_;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Noisy copy of the ground truth. The random stream depends only on the seed
// and the image stem, so results do not depend on call order or threads.
class SyntheticProvider final : public DetectionProvider {
 public:
  explicit SyntheticProvider(ProviderConfig config)
      : config_(std::move(config)) {}

  DetectionSet detect(const ImageRecord& image) override {
    std::mt19937_64 rng(config_.noise_seed ^ fnv1a(image.stem()));
    // 53 random bits to [0,1); std::uniform_real_distribution is not
    // specified bit-for-bit across standard libraries.
    auto uniform = [&rng] {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    std::vector<Detection> dets;
    const double w = image.width;
    const double h = image.height;
    for (const auto& a : image.annotations) {
      const double drop_draw = uniform();
      if (drop_draw < config_.drop_rate) continue;
      Detection d{a.class_id, a.box, 1.0};
      if (config_.jitter_px > 0) {
        auto shift = [&](double v, double extent) {
          return std::clamp(v + (2 * uniform() - 1) * config_.jitter_px, 0.0,
                            extent);
        };
        BBox moved{shift(a.box.x1, w), shift(a.box.y1, h), shift(a.box.x2, w),
                   shift(a.box.y2, h)};
        if (moved.fits(w, h)) d.box = moved;
        d.confidence = 1.0 - 0.5 * uniform();
      }
      dets.push_back(d);
    }
    return {image, apply_floor(std::move(dets), config_.confidence_floor), tag()};
  }

  std::string tag() const override {
    return "synthetic:seed=" + std::to_string(config_.noise_seed);
  }

 private:
  ProviderConfig config_;
};

std::string media_type_for(const fs::path& p) {
  const std::string ext = to_lower(p.extension().string());
  return ext == ".png" ? "image/png" : "image/jpeg";
}

class HttpProvider final : public DetectionProvider {
 public:
  explicit HttpProvider(ProviderConfig config)
      : config_(std::move(config)),
        url_(detail::split_url(config_.location)),
        slots_(config_.max_in_flight) {}

  DetectionSet detect(const ImageRecord& image) override {
    const auto bytes = read_file_bytes(image.path);
    nlohmann::json body = {{"image", detail::base64_encode(bytes)},
                           {"media_type", media_type_for(image.path)},
                           {"name", image.path.filename().string()},
                           {"width", image.width},
                           {"height", image.height}};

    httplib::Result res;
    {
      slots_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{slots_};
      httplib::Client client(url_.origin);
      const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
      client.set_connection_timeout(timeout);
      client.set_read_timeout(timeout);
      client.set_write_timeout(timeout);
      res = client.Post(url_.path, body.dump(), "application/json");
    }

    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout) {
        throw TimeoutError("detector request timed out: " + config_.location);
      }
      throw TransportError("detector request failed: " + httplib::to_string(err));
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("detector endpoint " + config_.location + " failed",
                           res->status);
    }
    return {image, apply_floor(parse_response(res->body, image),
                               config_.confidence_floor),
            tag()};
  }

  std::string tag() const override { return "http:" + config_.location; }

 private:
  static std::vector<Detection> parse_response(const std::string& body,
                                               const ImageRecord& image) {
    std::vector<Detection> out;
    try {
      const auto j = nlohmann::json::parse(body);
      const auto& list = j.is_array() ? j : j.at("detections");
      for (const auto& item : list) {
        Detection d;
        d.class_id = item.at("class_id").get<int>();
        d.box = {item.at("x1").get<double>(), item.at("y1").get<double>(),
                 item.at("x2").get<double>(), item.at("y2").get<double>()};
        d.confidence = item.at("confidence").get<double>();
        if (!is_valid_class(d.class_id) ||
            !d.box.fits(image.width, image.height) || d.confidence < 0 ||
            d.confidence > 1) {
          throw ProtocolError("detection out of range in detector response");
        }
        out.push_back(d);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed detector response: ") +
                          e.what());
    }
    return out;
  }

  ProviderConfig config_;
  detail::SplitUrl url_;
  std::counting_semaphore<1024> slots_;
};

}  // namespace

void ProviderConfig::validate() const {
  if (confidence_floor < 0 || confidence_floor > 1) {
    throw DomainError("confidence_floor must lie in [0,1]");
  }
  if (drop_rate < 0 || drop_rate > 1) {
    throw DomainError("drop_rate must lie in [0,1]");
  }
  if (jitter_px < 0) throw DomainError("jitter_px must be >= 0");
  if (max_in_flight < 1 || max_in_flight > 1024) {
    throw DomainError("max_in_flight must lie in [1,1024]");
  }
  if (timeout_ms < 1) throw DomainError("timeout_ms must be >= 1");
  if (kind != ProviderKind::kSynthetic && location.empty()) {
    throw DomainError("provider location required for " + to_string(kind));
  }
}

std::unique_ptr<DetectionProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  switch (config.kind) {
    case ProviderKind::kFile:
      return std::make_unique<FileProvider>(config);
    case ProviderKind::kHttp:
      return std::make_unique<HttpProvider>(config);
    case ProviderKind::kSynthetic:
      return std::make_unique<SyntheticProvider>(config);
  }
  throw DomainError("unknown provider kind");
}

DetectionSet detect(const ImageRecord& image, const ProviderConfig& config) {
  return make_provider(config)->detect(image);
}

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kFile: return "file";
    case ProviderKind::kHttp: return "http";
    case ProviderKind::kSynthetic: return "synthetic";
  }
  return "unknown";
}

ProviderKind provider_kind_from_string(const std::string& s) {
  if (s == "file") return ProviderKind::kFile;
  if (s == "http") return ProviderKind::kHttp;
  if (s == "synthetic") return ProviderKind::kSynthetic;
  throw ConfigError("unknown detector kind '" + s + "'");
}

void to_json(nlohmann::json& j, const Detection& d) {
  j = nlohmann::json{{"class_id", d.class_id},
                     {"class_name", fault_class(d.class_id).canonical_name},
                     {"x1", d.box.x1},
                     {"y1", d.box.y1},
                     {"x2", d.box.x2},
                     {"y2", d.box.y2},
                     {"confidence", d.confidence}};
}

void to_json(nlohmann::json& j, const DetectionSet& d) {
  j = nlohmann::json{{"image", d.image.path.filename().string()},
                     {"width", d.image.width},
                     {"height", d.image.height},
                     {"provider", d.provider_tag},
                     {"detections", d.detections}};
}

}  // namespace wtdiag
