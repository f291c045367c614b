#include "wtdiag/label_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"

namespace wtdiag {
namespace {

constexpr double kEdgeSlack = 1e-6;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r' || line[i] == '\v' ||
                               line[i] == '\f')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != '\v' && line[i] != '\f') {
      ++i;
    }
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(field) + "'", line_no);
  }
  return value;
}

ClassId parse_class(std::string_view field, std::size_t line_no) {
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("invalid class id '" + std::string(field) + "'", line_no);
  }
  if (!is_valid_class(value)) {
    throw DomainError("line " + std::to_string(line_no) + ": class id " +
                      std::to_string(value) + " outside 0-3");
  }
  return value;
}

double snap(double v, double extent) {
  if (v < 0 && v > -kEdgeSlack * extent) return 0;
  if (v > extent && v < extent * (1 + kEdgeSlack)) return extent;
  return v;
}

void require_unit(double v, const char* name, std::size_t line_no) {
  if (v < 0.0 || v > 1.0) {
    throw DomainError("line " + std::to_string(line_no) + ": " + name +
                      " outside [0,1]");
  }
}

BBox to_pixel_box(double cx, double cy, double w, double h, int width,
                  int height, std::size_t line_no) {
  require_unit(cx, "cx", line_no);
  require_unit(cy, "cy", line_no);
  require_unit(w, "w", line_no);
  require_unit(h, "h", line_no);
  if (w <= 0 || h <= 0) {
    throw DomainError("line " + std::to_string(line_no) + ": zero-area box");
  }
  const double fw = width;
  const double fh = height;
  BBox box{snap((cx - w / 2) * fw, fw), snap((cy - h / 2) * fh, fh),
           snap((cx + w / 2) * fw, fw), snap((cy + h / 2) * fh, fh)};
  if (!box.fits(fw, fh)) {
    throw DomainError("line " + std::to_string(line_no) +
                      ": box outside image bounds");
  }
  return box;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    ++line_no;
    auto fields = split_fields(line);
    if (!fields.empty()) fn(fields, line_no);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw DomainError("image dimensions must be >= 1");
  }
}

void append_normalized(std::string& out, const BBox& box, int width,
                       int height) {
  const double fw = width;
  const double fh = height;
  char buf[128];
  std::snprintf(buf, sizeof(buf), " %.6f %.6f %.6f %.6f",
                (box.x1 + box.x2) / 2 / fw, (box.y1 + box.y2) / 2 / fh,
                (box.x2 - box.x1) / fw, (box.y2 - box.y1) / fh);
  out += buf;
}

}  // namespace

void validate_record(const ImageRecord& record) {
  check_dims(record.width, record.height);
  for (const auto& a : record.annotations) {
    if (!is_valid_class(a.class_id)) {
      throw DomainError(record.path.string() + ": class id out of range");
    }
    if (!a.box.fits(record.width, record.height)) {
      throw DomainError(record.path.string() +
                        ": annotation outside image bounds");
    }
  }
}

std::vector<Annotation> parse_label_file(std::string_view text, int width,
                                         int height) {
  check_dims(width, height);
  std::vector<Annotation> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f,
                          std::size_t line_no) {
    if (f.size() != 5) {
      throw ParseError("expected 5 fields, got " + std::to_string(f.size()),
                       line_no);
    }
    const ClassId cls = parse_class(f[0], line_no);
    const BBox box = to_pixel_box(
        parse_double(f[1], line_no), parse_double(f[2], line_no),
        parse_double(f[3], line_no), parse_double(f[4], line_no), width,
        height, line_no);
    out.push_back({cls, box});
  });
  return out;
}

std::vector<Detection> parse_prediction_file(std::string_view text, int width,
                                             int height,
                                             PredictionParseOptions options) {
  check_dims(width, height);
  std::vector<Detection> out;
  for_each_line(text, [&](const std::vector<std::string_view>& f,
                          std::size_t line_no) {
    const bool short_ok = options.allow_missing_confidence && f.size() == 5;
    if (f.size() != 6 && !short_ok) {
      throw ParseError("expected 6 fields, got " + std::to_string(f.size()),
                       line_no);
    }
    const ClassId cls = parse_class(f[0], line_no);
    const BBox box = to_pixel_box(
        parse_double(f[1], line_no), parse_double(f[2], line_no),
        parse_double(f[3], line_no), parse_double(f[4], line_no), width,
        height, line_no);
    double confidence = 1.0;
    if (f.size() == 6) {
      confidence = parse_double(f[5], line_no);
      if (confidence < 0.0 || confidence > 1.0) {
        throw DomainError("line " + std::to_string(line_no) +
                          ": confidence outside [0,1]");
      }
    }
    out.push_back({cls, box, confidence});
  });
  return out;
}

std::string write_label_file(const std::vector<Annotation>& annotations,
                             int width, int height) {
  check_dims(width, height);
  std::string out;
  for (const auto& a : annotations) {
    if (!is_valid_class(a.class_id)) throw DomainError("class id out of range");
    if (!a.box.fits(width, height)) {
      throw DomainError("annotation outside image bounds");
    }
    out += std::to_string(a.class_id);
    append_normalized(out, a.box, width, height);
    out += '\n';
  }
  return out;
}

std::string write_prediction_file(const std::vector<Detection>& detections,
                                  int width, int height) {
  check_dims(width, height);
  std::string out;
  for (const auto& d : detections) {
    if (!is_valid_class(d.class_id)) throw DomainError("class id out of range");
    if (!d.box.fits(width, height)) {
      throw DomainError("detection outside image bounds");
    }
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw DomainError("confidence outside [0,1]");
    }
    out += std::to_string(d.class_id);
    append_normalized(out, d.box, width, height);
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.6f\n", d.confidence);
    out += buf;
  }
  return out;
}

}  // namespace wtdiag
