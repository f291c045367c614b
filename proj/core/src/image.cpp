#include "wtdiag/image.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"

namespace wtdiag {
namespace {

Image from_mat(const cv::Mat& mat) {
  Image img;
  img.width = mat.cols;
  img.height = mat.rows;
  img.pixels.resize(static_cast<std::size_t>(mat.cols) * mat.rows *
                    Image::kChannels);
  const std::size_t row_bytes =
      static_cast<std::size_t>(mat.cols) * Image::kChannels;
  for (int y = 0; y < mat.rows; ++y) {
    std::memcpy(img.pixels.data() + y * row_bytes, mat.ptr(y), row_bytes);
  }
  return img;
}

cv::Mat as_mat(const Image& image) {
  // cv::Mat wants a non-const pointer; encoders only read from it.
  return cv::Mat(image.height, image.width, CV_8UC3,
                 const_cast<std::uint8_t*>(image.pixels.data()));
}

}  // namespace

Image::Image(int w, int h, std::uint8_t fill)
    : width(w),
      height(h),
      pixels(static_cast<std::size_t>(w) * h * kChannels, fill) {}

bool is_image_file(const std::filesystem::path& path) {
  const std::string ext = to_lower(path.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) {
      throw NotFoundError("no such file: " + path.string());
    }
    throw IoError("cannot read " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw EncodingError("empty image data");
  cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat;
  try {
    mat = cv::imdecode(buf, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw EncodingError(std::string("image decode failed: ") + e.what());
  }
  if (mat.empty()) throw EncodingError("image data does not decode");
  return from_mat(mat);
}

Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const EncodingError& e) {
    throw EncodingError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw EncodingError("cannot encode an empty image");
  std::vector<std::uint8_t> out;
  bool ok = false;
  try {
    ok = cv::imencode(".png", as_mat(image), out);
  } catch (const cv::Exception& e) {
    throw EncodingError(std::string("png encode failed: ") + e.what());
  }
  if (!ok) throw EncodingError("png encode failed");
  return out;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Image crop(const Image& image, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > image.width ||
      y + h > image.height) {
    throw DomainError("crop rectangle outside image");
  }
  Image out(w, h);
  const std::size_t row_bytes = static_cast<std::size_t>(w) * Image::kChannels;
  for (int row = 0; row < h; ++row) {
    std::memcpy(out.at(0, row), image.at(x, y + row), row_bytes);
  }
  return out;
}

}  // namespace wtdiag
