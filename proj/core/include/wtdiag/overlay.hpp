#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wtdiag/image.hpp"
#include "wtdiag/types.hpp"

namespace wtdiag {

inline constexpr int kOverlayStroke = 2;

// B,G,R stroke color per class: crack red, skin debonding blue, surface
// blemish yellow, pitted surface magenta. The class is identified by color;
// no glyphs are drawn, so only the rectangle outline pixels change.
std::array<std::uint8_t, 3> class_color(ClassId id);

// Draws each detection as a kOverlayStroke-wide outline lying inside the box
// (pixel rows/columns floor(x1)..ceil(x2)-1). Later detections paint over
// earlier ones.
Image render_overlay(const Image& image, const std::vector<Detection>& detections);

}  // namespace wtdiag
