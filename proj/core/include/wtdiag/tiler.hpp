#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/image.hpp"
#include "wtdiag/types.hpp"

namespace wtdiag {

// Multi-scale sliding-window parameters. Window k has size
// round(base * scale_factor^k); consecutive windows along an axis are
// floor(size * overlap_ratio) pixels apart.
struct TilingConfig {
  int base_width = 640;
  int base_height = 640;
  double scale_factor = 0.5;
  int scale_count = 2;
  double overlap_ratio = 0.25;
  double min_visibility = 0.3;
  bool edge_clamp = true;

  // Throws DomainError on out-of-range parameters.
  void validate() const;
};

struct CropWindow {
  int scale_index = 0;
  int origin_x = 0;
  int origin_y = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const CropWindow&, const CropWindow&) = default;
};

struct CropResult {
  CropWindow window;
  Image image;
  std::vector<Annotation> annotations;  // window-local coordinates
  std::filesystem::path provenance;
};

// Window size at scale k, rounded half-up to whole pixels.
std::pair<int, int> window_size(const TilingConfig& config, int k);

// floor(window_extent * overlap_ratio), at least 1.
int stride(int window_extent, double overlap_ratio);

// Origins 0, s, 2s, ... for n = floor((extent - window) / s) + 1 windows,
// plus one window flush with the far edge when edge_clamp is set and the
// regular positions stop short of it.
std::vector<int> axis_positions(int extent, int window, int step,
                                bool edge_clamp);

// All windows for an image of the given size: ascending scale, then
// row-major. Scales whose window does not fit are skipped.
std::vector<CropWindow> generate_windows(int image_width, int image_height,
                                         const TilingConfig& config);
std::vector<CropWindow> generate_windows(const ImageRecord& image,
                                         const TilingConfig& config);

// Keeps an annotation iff the fraction of its area inside the window is at
// least min_visibility; kept boxes are clipped and made window-local.
std::vector<Annotation> remap_annotations(
    const std::vector<Annotation>& annotations, const CropWindow& window,
    double min_visibility);

CropResult make_crop(const Image& source, const ImageRecord& record,
                     const CropWindow& window, double min_visibility);

// "<stem>_s<k>_x<origin_x>_y<origin_y>"
std::string crop_stem(const std::string& source_stem, const CropWindow& window);

struct AugmentManifest {
  std::size_t images_in = 0;
  std::size_t images_out = 0;
  std::size_t crops_written = 0;
  std::vector<std::string> unprocessed_originals;  // passed through untiled
  std::vector<std::string> negative_crops;         // crops with no labels
  std::map<ClassId, std::size_t> annotations_in;
  std::map<ClassId, std::size_t> annotations_out;
  double expansion_factor = 0;  // images_out / images_in, 0 when empty
};

// Window count per record as the real run would produce, without I/O beyond
// what the records already hold. Originals that cannot be tiled count 1.
std::vector<std::size_t> plan_augmentation(
    const std::vector<ImageRecord>& records, const TilingConfig& config);

// Writes every crop as PNG plus label file into output_dir and copies
// untileable originals through with their labels. Images are processed by up
// to `parallelism` workers; the manifest is assembled in record order. On a
// write failure an IoError reports how many files were already written; those
// files are left in place.
AugmentManifest augment_dataset(const std::vector<ImageRecord>& records,
                                const TilingConfig& config,
                                const std::filesystem::path& output_dir,
                                int parallelism = 1);

void to_json(nlohmann::json& j, const AugmentManifest& m);

}  // namespace wtdiag
