#include "wtdiag/dataset.hpp"

#include <algorithm>
#include <map>
#include <system_error>

#include <nlohmann/json.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/image.hpp"
#include "wtdiag/label_io.hpp"

namespace fs = std::filesystem;

namespace wtdiag {
namespace {

struct DirListing {
  std::map<std::string, fs::path> images;  // stem -> path
  std::map<std::string, fs::path> labels;
};

DirListing list_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("not a readable directory: " + dir.string());
  }
  DirListing out;
  fs::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (is_image_file(p)) {
      auto [pos, inserted] = out.images.emplace(p.stem().string(), p);
      if (!inserted) {
        throw IntegrityError("two images share the stem '" +
                             p.stem().string() + "' in " + dir.string());
      }
    } else if (p.extension() == ".txt") {
      out.labels.emplace(p.stem().string(), p);
    }
  }
  return out;
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  if (fs::file_size(a, ec) != fs::file_size(b, ec) || ec) return false;
  return read_file_bytes(a) == read_file_bytes(b);
}

}  // namespace

ImageRecord read_record(const fs::path& image_path) {
  const Image img = load_image(image_path);
  ImageRecord rec;
  rec.path = image_path;
  rec.width = img.width;
  rec.height = img.height;
  return rec;
}

DatasetScan scan_dataset(const fs::path& dir) {
  const DirListing listing = list_dir(dir);
  DatasetScan scan;
  for (const auto& [stem, path] : listing.images) {
    ImageRecord rec = read_record(path);
    if (auto it = listing.labels.find(stem); it != listing.labels.end()) {
      try {
        rec.annotations =
            parse_label_file(read_text_file(it->second), rec.width, rec.height);
      } catch (const ParseError& e) {
        throw ParseError(it->second.string() + ": " + e.what());
      } catch (const DomainError& e) {
        throw DomainError(it->second.string() + ": " + e.what());
      }
    } else {
      scan.missing_labels.push_back(path.filename().string());
    }
    scan.records.push_back(std::move(rec));
  }
  for (const auto& [stem, path] : listing.labels) {
    if (!listing.images.count(stem)) {
      scan.orphan_labels.push_back(path.filename().string());
    }
  }
  return scan;
}

IntegrityReport validate_and_replenish(const fs::path& source_dir,
                                       const fs::path& target_dir) {
  const DirListing listing = list_dir(source_dir);
  IntegrityReport report;

  std::vector<fs::path> to_copy;
  for (const auto& [stem, image_path] : listing.images) {
    auto label_it = listing.labels.find(stem);
    if (label_it == listing.labels.end()) {
      report.missing_labels.push_back(image_path.filename().string());
      continue;
    }
    ImageRecord rec;
    try {
      rec = read_record(image_path);
    } catch (const EncodingError& e) {
      report.integrity_errors.push_back(image_path.filename().string() +
                                        ": " + e.what());
      continue;
    }
    try {
      parse_label_file(read_text_file(label_it->second), rec.width, rec.height);
    } catch (const ParseError& e) {
      report.integrity_errors.push_back(label_it->second.filename().string() +
                                        ": " + e.what());
      continue;
    } catch (const DomainError& e) {
      report.integrity_errors.push_back(label_it->second.filename().string() +
                                        ": " + e.what());
      continue;
    }
    to_copy.push_back(image_path);
    to_copy.push_back(label_it->second);
    ++report.pairs_valid;
  }
  for (const auto& [stem, label_path] : listing.labels) {
    if (!listing.images.count(stem)) {
      report.orphan_labels.push_back(label_path.filename().string());
    }
  }

  std::error_code ec;
  fs::create_directories(target_dir, ec);
  if (ec) throw IoError("cannot create " + target_dir.string() + ": " + ec.message());

  // Collisions are checked for the whole batch first so a conflict leaves the
  // target untouched.
  std::vector<fs::path> fresh;
  for (const auto& src : to_copy) {
    const fs::path dst = target_dir / src.filename();
    if (fs::exists(dst)) {
      if (!same_bytes(src, dst)) {
        throw IntegrityError("target already holds a different " +
                             dst.filename().string());
      }
      report.already_present.push_back(src.filename().string());
    } else {
      fresh.push_back(src);
    }
  }
  std::size_t images_copied = 0;
  for (const auto& src : fresh) {
    fs::copy_file(src, target_dir / src.filename(), fs::copy_options::none, ec);
    if (ec) {
      throw IoError("copy of " + src.string() + " failed: " + ec.message());
    }
    report.copied.push_back(src.filename().string());
    if (is_image_file(src)) ++images_copied;
  }
  report.pairs_copied = images_copied;
  return report;
}

void to_json(nlohmann::json& j, const IntegrityReport& r) {
  j = nlohmann::json{{"missing_labels", r.missing_labels},
                     {"orphan_labels", r.orphan_labels},
                     {"integrity_errors", r.integrity_errors},
                     {"copied", r.copied},
                     {"already_present", r.already_present},
                     {"pairs_valid", r.pairs_valid},
                     {"pairs_copied", r.pairs_copied},
                     {"ok", r.ok()}};
}

}  // namespace wtdiag
