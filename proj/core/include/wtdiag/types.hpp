#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wtdiag {

using ClassId = int;

// Axis-aligned box in pixel coordinates, corners (x1, y1) top-left and
// (x2, y2) bottom-right.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  bool valid() const { return x1 < x2 && y1 < y2 && x1 >= 0 && y1 >= 0; }
  bool fits(double image_width, double image_height) const {
    return valid() && x2 <= image_width && y2 <= image_height;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Annotation {
  ClassId class_id = 0;
  BBox box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct Detection {
  ClassId class_id = 0;
  BBox box;
  double confidence = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct ImageRecord {
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  std::vector<Annotation> annotations;

  std::string stem() const { return path.stem().string(); }
};

// Throws DomainError when a dimension is < 1 or an annotation leaves the
// image bounds.
void validate_record(const ImageRecord& record);

}  // namespace wtdiag
