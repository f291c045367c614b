#include "wtdiag/tiler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"
#include "wtdiag/label_io.hpp"

namespace fs = std::filesystem;

namespace wtdiag {
namespace {

// Absorbs representation error in products like 100 * 0.29 so the floor
// lands on the intended integer.
constexpr double kFloorSlack = 1e-9;

int scaled_extent(int base, double r, int k) {
  const double exact = static_cast<double>(base) * std::pow(r, k);
  const double rounded = std::floor(exact + 0.5 + kFloorSlack);
  if (!(rounded < static_cast<double>(std::numeric_limits<int>::max()))) {
    throw DomainError("window size at scale " + std::to_string(k) +
                      " overflows");
  }
  if (rounded < 1) {
    throw DomainError("window size at scale " + std::to_string(k) +
                      " rounds to 0");
  }
  return static_cast<int>(rounded);
}

}  // namespace

void TilingConfig::validate() const {
  if (base_width < 1 || base_height < 1) {
    throw DomainError("base window size must be >= 1");
  }
  if (!(scale_factor > 0) || !std::isfinite(scale_factor)) {
    throw DomainError("scale_factor must be positive");
  }
  if (scale_count < 1) throw DomainError("scale_count must be >= 1");
  if (!(overlap_ratio > 0 && overlap_ratio < 1)) {
    throw DomainError("overlap_ratio must lie in (0,1)");
  }
  if (!(min_visibility > 0 && min_visibility <= 1)) {
    throw DomainError("min_visibility must lie in (0,1]");
  }
}

std::pair<int, int> window_size(const TilingConfig& config, int k) {
  if (k < 0 || k >= config.scale_count) {
    throw DomainError("scale index " + std::to_string(k) + " outside [0," +
                      std::to_string(config.scale_count) + ")");
  }
  return {scaled_extent(config.base_width, config.scale_factor, k),
          scaled_extent(config.base_height, config.scale_factor, k)};
}

int stride(int window_extent, double overlap_ratio) {
  const double s = std::floor(window_extent * overlap_ratio + kFloorSlack);
  return std::max(1, static_cast<int>(s));
}

std::vector<int> axis_positions(int extent, int window, int step,
                                bool edge_clamp) {
  if (window > extent) {
    throw DomainError("window " + std::to_string(window) +
                      " exceeds extent " + std::to_string(extent));
  }
  if (window < 1 || step < 1) throw DomainError("window and step must be >= 1");
  const int n = (extent - window) / step + 1;
  std::vector<int> origins;
  origins.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) origins.push_back(i * step);
  if (edge_clamp && origins.back() + window < extent) {
    origins.push_back(extent - window);
  }
  return origins;
}

std::vector<CropWindow> generate_windows(int image_width, int image_height,
                                         const TilingConfig& config) {
  config.validate();
  std::vector<CropWindow> out;
  if (image_width < 1 || image_height < 1) return out;
  for (int k = 0; k < config.scale_count; ++k) {
    const auto [w, h] = window_size(config, k);
    if (w > image_width || h > image_height) continue;
    const auto xs = axis_positions(image_width, w,
                                   stride(w, config.overlap_ratio),
                                   config.edge_clamp);
    const auto ys = axis_positions(image_height, h,
                                   stride(h, config.overlap_ratio),
                                   config.edge_clamp);
    for (int y : ys) {
      for (int x : xs) out.push_back({k, x, y, w, h});
    }
  }
  return out;
}

std::vector<CropWindow> generate_windows(const ImageRecord& image,
                                         const TilingConfig& config) {
  return generate_windows(image.width, image.height, config);
}

std::vector<Annotation> remap_annotations(
    const std::vector<Annotation>& annotations, const CropWindow& window,
    double min_visibility) {
  const double wx1 = window.origin_x;
  const double wy1 = window.origin_y;
  const double wx2 = wx1 + window.width;
  const double wy2 = wy1 + window.height;
  std::vector<Annotation> out;
  for (const auto& a : annotations) {
    const double ix1 = std::max(a.box.x1, wx1);
    const double iy1 = std::max(a.box.y1, wy1);
    const double ix2 = std::min(a.box.x2, wx2);
    const double iy2 = std::min(a.box.y2, wy2);
    if (ix2 <= ix1 || iy2 <= iy1) continue;
    const double visible = (ix2 - ix1) * (iy2 - iy1);
    const double area = a.box.width() * a.box.height();
    if (visible / area < min_visibility) continue;
    out.push_back({a.class_id, {ix1 - wx1, iy1 - wy1, ix2 - wx1, iy2 - wy1}});
  }
  return out;
}

CropResult make_crop(const Image& source, const ImageRecord& record,
                     const CropWindow& window, double min_visibility) {
  return {window,
          crop(source, window.origin_x, window.origin_y, window.width,
               window.height),
          remap_annotations(record.annotations, window, min_visibility),
          record.path};
}

std::string crop_stem(const std::string& source_stem, const CropWindow& window) {
  return source_stem + "_s" + std::to_string(window.scale_index) + "_x" +
         std::to_string(window.origin_x) + "_y" +
         std::to_string(window.origin_y);
}

std::vector<std::size_t> plan_augmentation(
    const std::vector<ImageRecord>& records, const TilingConfig& config) {
  config.validate();
  std::vector<std::size_t> counts;
  counts.reserve(records.size());
  for (const auto& rec : records) {
    const std::size_t n = generate_windows(rec, config).size();
    counts.push_back(n == 0 ? 1 : n);
  }
  return counts;
}

namespace {

struct ImageOutcome {
  bool passthrough = false;
  std::size_t files_written = 0;
  std::size_t crops = 0;
  std::vector<std::string> negatives;
  std::map<ClassId, std::size_t> annotations_out;
  std::exception_ptr error;
};

void process_record(const ImageRecord& rec, const TilingConfig& config,
                    const fs::path& output_dir, ImageOutcome& outcome) {
  const auto windows = generate_windows(rec, config);
  const std::string stem = rec.stem();
  if (windows.empty()) {
    outcome.passthrough = true;
    const fs::path image_dst = output_dir / rec.path.filename();
    std::error_code ec;
    fs::copy_file(rec.path, image_dst, fs::copy_options::overwrite_existing, ec);
    if (ec) {
      throw IoError("copy of " + rec.path.string() + " failed: " + ec.message());
    }
    ++outcome.files_written;
    write_text_file(output_dir / (stem + ".txt"),
                    write_label_file(rec.annotations, rec.width, rec.height));
    ++outcome.files_written;
    for (const auto& a : rec.annotations) ++outcome.annotations_out[a.class_id];
    return;
  }
  const Image source = load_image(rec.path);
  if (source.width != rec.width || source.height != rec.height) {
    throw IntegrityError(rec.path.string() +
                         ": decoded size differs from record");
  }
  for (const auto& w : windows) {
    const CropResult c = make_crop(source, rec, w, config.min_visibility);
    const std::string name = crop_stem(stem, w);
    save_png(c.image, output_dir / (name + ".png"));
    ++outcome.files_written;
    write_text_file(output_dir / (name + ".txt"),
                    write_label_file(c.annotations, w.width, w.height));
    ++outcome.files_written;
    ++outcome.crops;
    if (c.annotations.empty()) outcome.negatives.push_back(name);
    for (const auto& a : c.annotations) ++outcome.annotations_out[a.class_id];
  }
}

}  // namespace

AugmentManifest augment_dataset(const std::vector<ImageRecord>& records,
                                const TilingConfig& config,
                                const fs::path& output_dir, int parallelism) {
  config.validate();
  AugmentManifest manifest;
  if (records.empty()) return manifest;
  for (const auto& rec : records) validate_record(rec);

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) {
    throw IoError("cannot create " + output_dir.string() + ": " + ec.message());
  }

  std::vector<ImageOutcome> outcomes(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        process_record(records[i], config, output_dir, outcomes[i]);
      } catch (...) {
        outcomes[i].error = std::current_exception();
      }
    }
  };
  const int workers =
      std::clamp(parallelism, 1, static_cast<int>(records.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }

  std::size_t written = 0;
  for (const auto& o : outcomes) written += o.files_written;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!outcomes[i].error) continue;
    try {
      std::rethrow_exception(outcomes[i].error);
    } catch (const IoError& e) {
      throw IoError(std::string(e.what()) + "; " + std::to_string(written) +
                    " files already written to " + output_dir.string() +
                    " were left in place");
    }
  }

  manifest.images_in = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto& o = outcomes[i];
    for (const auto& a : rec.annotations) ++manifest.annotations_in[a.class_id];
    for (const auto& [cls, n] : o.annotations_out) {
      manifest.annotations_out[cls] += n;
    }
    if (o.passthrough) {
      manifest.unprocessed_originals.push_back(rec.path.filename().string());
      ++manifest.images_out;
    } else {
      manifest.images_out += o.crops;
      manifest.crops_written += o.crops;
      manifest.negative_crops.insert(manifest.negative_crops.end(),
                                     o.negatives.begin(), o.negatives.end());
    }
  }
  manifest.expansion_factor = static_cast<double>(manifest.images_out) /
                              static_cast<double>(manifest.images_in);
  return manifest;
}

void to_json(nlohmann::json& j, const AugmentManifest& m) {
  auto per_class = [](const std::map<ClassId, std::size_t>& counts) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& fc : fault_classes()) {
      auto it = counts.find(fc.id);
      out[fc.canonical_name] = it == counts.end() ? 0 : it->second;
    }
    return out;
  };
  j = nlohmann::json{{"images_in", m.images_in},
                     {"images_out", m.images_out},
                     {"crops_written", m.crops_written},
                     {"unprocessed_originals", m.unprocessed_originals},
                     {"negative_crops", m.negative_crops},
                     {"annotations_in", per_class(m.annotations_in)},
                     {"annotations_out", per_class(m.annotations_out)},
                     {"expansion_factor", m.expansion_factor}};
}

}  // namespace wtdiag
