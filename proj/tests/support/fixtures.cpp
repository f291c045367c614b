#include "fixtures.hpp"

#include <atomic>
#include <array>
#include <cstdio>
#include <stdexcept>

#include <sys/wait.h>
#include <unistd.h>

#include "wtdiag/dataset.hpp"
#include "wtdiag/label_io.hpp"

namespace fs = std::filesystem;

namespace wtdiag::fixtures {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("wtdiag_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Image patterned_image(int width, int height, std::uint32_t seed) {
  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto* px = img.at(x, y);
      px[0] = static_cast<std::uint8_t>((x + seed) & 0xff);
      px[1] = static_cast<std::uint8_t>((y * 3 + seed * 7) & 0xff);
      px[2] = static_cast<std::uint8_t>(((x ^ y) + seed * 13) & 0xff);
    }
  }
  return img;
}

Annotation random_annotation(std::mt19937& rng, int width, int height, int min_box,
                             int max_box, ClassId class_id) {
  std::uniform_int_distribution<int> wdist(min_box, std::min(max_box, width));
  std::uniform_int_distribution<int> hdist(min_box, std::min(max_box, height));
  const int w = wdist(rng);
  const int h = hdist(rng);
  const int x = std::uniform_int_distribution<int>(0, width - w)(rng);
  const int y = std::uniform_int_distribution<int>(0, height - h)(rng);
  return {class_id, {double(x), double(y), double(x + w), double(y + h)}};
}

std::vector<ImageRecord> write_fixture(const fs::path& dir, const FixtureOptions& o) {
  fs::create_directories(dir);
  std::mt19937 rng(o.seed);
  for (int i = 0; i < o.count; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s%03d", o.prefix.c_str(), i);
    save_png(patterned_image(o.width, o.height, o.seed + static_cast<std::uint32_t>(i)),
             dir / (std::string(name) + ".png"));
    std::vector<Annotation> anns;
    for (int b = 0; b < o.boxes_per_image; ++b) {
      anns.push_back(random_annotation(rng, o.width, o.height, o.min_box, o.max_box, b % 4));
    }
    write_text_file(dir / (std::string(name) + ".txt"),
                    write_label_file(anns, o.width, o.height));
  }
  return scan_dataset(dir).records;
}

std::string run_command(const std::string& command, int* exit_code) {
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed: " + command);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  if (exit_code) *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

}  // namespace wtdiag::fixtures
