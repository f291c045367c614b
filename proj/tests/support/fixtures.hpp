#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wtdiag/image.hpp"
#include "wtdiag/types.hpp"

namespace wtdiag::fixtures {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

Image patterned_image(int width, int height, std::uint32_t seed);

struct FixtureOptions {
  int count = 4;
  int width = 640;
  int height = 480;
  int boxes_per_image = 4;  // classes cycle 0,1,2,3 within an image
  int min_box = 16;
  int max_box = 96;
  std::uint32_t seed = 1;
  std::string prefix = "img";
};

// Writes <prefix>NNN.png plus label files and returns the records as a
// dataset scan reads them back.
std::vector<ImageRecord> write_fixture(const std::filesystem::path& dir,
                                       const FixtureOptions& options);

// Integer-corner annotation fully inside a width x height image.
Annotation random_annotation(std::mt19937& rng, int width, int height, int min_box,
                             int max_box, ClassId class_id);

std::string run_command(const std::string& command, int* exit_code);

}  // namespace wtdiag::fixtures
