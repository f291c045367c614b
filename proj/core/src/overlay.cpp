#include "wtdiag/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "wtdiag/fault_class.hpp"

namespace wtdiag {

std::array<std::uint8_t, 3> class_color(ClassId id) {
  static constexpr std::array<std::array<std::uint8_t, 3>, kNumFaultClasses>
      kColors = {{{0, 0, 255}, {255, 0, 0}, {0, 255, 255}, {255, 0, 255}}};
  fault_class(id);  // range check
  return kColors[static_cast<std::size_t>(id)];
}

Image render_overlay(const Image& image,
                     const std::vector<Detection>& detections) {
  Image out = image;
  if (out.empty()) return out;
  for (const auto& d : detections) {
    const auto color = class_color(d.class_id);
    const int x1 = std::clamp(static_cast<int>(std::floor(d.box.x1)), 0, out.width - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor(d.box.y1)), 0, out.height - 1);
    const int x2 = std::clamp(static_cast<int>(std::ceil(d.box.x2)) - 1, x1, out.width - 1);
    const int y2 = std::clamp(static_cast<int>(std::ceil(d.box.y2)) - 1, y1, out.height - 1);
    for (int y = y1; y <= y2; ++y) {
      const bool edge_row = y < y1 + kOverlayStroke || y > y2 - kOverlayStroke;
      for (int x = x1; x <= x2; ++x) {
        if (!edge_row && x >= x1 + kOverlayStroke && x <= x2 - kOverlayStroke) {
          x = x2 - kOverlayStroke;  // skip the interior
          continue;
        }
        std::copy(color.begin(), color.end(), out.at(x, y));
      }
    }
  }
  return out;
}

}  // namespace wtdiag
