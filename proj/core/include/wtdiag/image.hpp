#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wtdiag {

// 8-bit, 3-channel interleaved pixel buffer in B,G,R order (the order the
// codecs decode to), rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  static constexpr int kChannels = 3;

  bool empty() const { return width == 0 || height == 0; }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * kChannels;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * kChannels;
  }

  friend bool operator==(const Image&, const Image&) = default;
};

bool is_image_file(const std::filesystem::path& path);

// PNG and JPEG decode. Throws NotFoundError for a missing file and
// EncodingError when the bytes do not decode.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);

void save_png(const Image& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& image);

// Requires the rectangle to lie inside the image.
Image crop(const Image& image, int x, int y, int w, int h);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace wtdiag
