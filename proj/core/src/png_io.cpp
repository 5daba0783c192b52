#include "superpure/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "superpure/errors.hpp"

namespace superpure {
namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_pixels(const std::filesystem::path& path, int& height, int& width,
                                      int& channels) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw IoError("cannot read PNG " + path.string() + ": " + png.image.message);
  }
  const bool gray = (png.image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  channels = gray ? 1 : 3;
  height = static_cast<int>(png.image.height);
  width = static_cast<int>(png.image.width);
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  // A null background composites any alpha onto black.
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
  return buffer;
}

void write_pixels(const std::filesystem::path& path, int height, int width, int channels,
                  const std::vector<std::uint8_t>& buffer) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + png.image.message);
  }
}

std::uint8_t encode(float v) {
  const float scaled = std::round(v * 255.0f);
  return static_cast<std::uint8_t>(scaled < 0.0f ? 0.0f : (scaled > 255.0f ? 255.0f : scaled));
}

}  // namespace

ImageTensor load_png(const std::filesystem::path& path) {
  int h = 0, w = 0, c = 0;
  const auto bytes = read_pixels(path, h, w, c);
  std::vector<float> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) data[i] = static_cast<float>(bytes[i]) / 255.0f;
  return ImageTensor(h, w, c, std::move(data));
}

void save_png(const std::filesystem::path& path, const ImageTensor& img) {
  std::vector<std::uint8_t> bytes(img.data().size());
  const auto data = img.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = encode(data[i]);
  write_pixels(path, img.height(), img.width(), img.channels(), bytes);
}

PixelMask load_mask_png(const std::filesystem::path& path) {
  int h = 0, w = 0, c = 0;
  const auto bytes = read_pixels(path, h, w, c);
  PixelMask mask(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = (static_cast<std::size_t>(y) * w + x) * c;
      bool on = false;
      for (int k = 0; k < c; ++k) on = on || bytes[base + k] != 0;
      mask.set(y, x, on);
    }
  }
  return mask;
}

void save_mask_png(const std::filesystem::path& path, const PixelMask& mask) {
  std::vector<std::uint8_t> bytes(mask.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.test_index(i) ? 255 : 0;
  write_pixels(path, mask.height(), mask.width(), 1, bytes);
}

ImageTensor quantize_8bit(const ImageTensor& img) {
  std::vector<float> data(img.data().begin(), img.data().end());
  for (float& v : data) v = static_cast<float>(encode(v)) / 255.0f;
  return ImageTensor(img.height(), img.width(), img.channels(), std::move(data));
}

}  // namespace superpure
