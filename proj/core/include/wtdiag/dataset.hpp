#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/types.hpp"

namespace wtdiag {

// A directory of images with sibling "<stem>.txt" label files.
struct DatasetScan {
  std::vector<ImageRecord> records;       // sorted by file name
  std::vector<std::string> missing_labels;  // image files without a label
  std::vector<std::string> orphan_labels;   // label files without an image
};

// Decodes every image to learn its size and parses its label file. Images
// without a label get an empty annotation list and are listed in
// missing_labels. Parse and decode failures propagate.
DatasetScan scan_dataset(const std::filesystem::path& dir);

// Image decode to learn dimensions only.
ImageRecord read_record(const std::filesystem::path& image_path);

struct IntegrityReport {
  std::vector<std::string> missing_labels;
  std::vector<std::string> orphan_labels;
  // Files that exist but cannot be used: undecodable images, invalid labels.
  std::vector<std::string> integrity_errors;
  std::vector<std::string> copied;           // file names copied this run
  std::vector<std::string> already_present;  // identical copy already in target
  std::size_t pairs_valid = 0;   // complete, decodable pairs in the source
  std::size_t pairs_copied = 0;  // pairs whose image was copied this run

  bool ok() const { return integrity_errors.empty(); }
};

// Cross-checks images against labels in source_dir and copies every complete
// image/label pair into target_dir. Never deletes or overwrites: a target file
// with the same name but different bytes raises IntegrityError before anything
// is copied. A second run over the same directories copies nothing.
IntegrityReport validate_and_replenish(const std::filesystem::path& source_dir,
                                       const std::filesystem::path& target_dir);

void to_json(nlohmann::json& j, const IntegrityReport& r);

}  // namespace wtdiag
