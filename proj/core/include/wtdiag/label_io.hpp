#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wtdiag/types.hpp"

namespace wtdiag {

// Label files hold one object per line as whitespace-separated normalized
// fields "class cx cy w h"; prediction files append a confidence field.
// Parsed boxes are converted to pixel-space corners for a width x height image.
// Corners that land outside the image by less than 1e-6 of the extent (print
// rounding) are clamped; anything further out is rejected.

std::vector<Annotation> parse_label_file(std::string_view text, int width,
                                         int height);

// Fixed six-decimal format, one line per annotation, '\n' terminated.
std::string write_label_file(const std::vector<Annotation>& annotations,
                             int width, int height);

struct PredictionParseOptions {
  // Accept five-field label lines as predictions with confidence 1.0. Lets a
  // ground-truth directory be scored against itself.
  bool allow_missing_confidence = false;
};

std::vector<Detection> parse_prediction_file(std::string_view text, int width,
                                             int height,
                                             PredictionParseOptions options = {});

std::string write_prediction_file(const std::vector<Detection>& detections,
                                  int width, int height);

}  // namespace wtdiag
