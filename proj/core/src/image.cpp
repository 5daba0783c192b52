#include "superpure/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superpure/errors.hpp"

namespace superpure {
namespace {

void check_dims(int height, int width) {
  if (height < 1 || width < 1) {
    throw DimensionError("image dimensions must be positive, got " + std::to_string(height) +
                         "x" + std::to_string(width));
  }
}

void check_channels(int channels) {
  if (channels != 1 && channels != 3) {
    throw DimensionError("only 1 or 3 channels are supported, got " + std::to_string(channels));
  }
}

std::size_t element_count(int height, int width, int channels) {
  return static_cast<std::size_t>(height) * width * channels;
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  check_dims(height, width);
  check_channels(channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ConfigError("fill value outside [0,1]");
  data_.assign(element_count(height, width, channels), fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_dims(height, width);
  check_channels(channels);
  if (data_.size() != element_count(height, width, channels)) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(height) + "x" +
                         std::to_string(width) + "x" + std::to_string(channels));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError("image value outside [0,1]");
  }
}

ImageTensor ImageTensor::clamped(int height, int width, int channels, std::vector<float> data) {
  for (float& v : data) {
    // NaN maps to 0.
    v = (v > 0.0f) ? std::min(v, 1.0f) : 0.0f;
  }
  return ImageTensor(height, width, channels, std::move(data));
}

void ImageTensor::set(int y, int x, int c, float v) {
  data_[index(y, x, c)] = (v > 0.0f) ? std::min(v, 1.0f) : 0.0f;
}

PixelMask::PixelMask(int height, int width) : height_(height), width_(width) {
  check_dims(height, width);
  bits_.assign(static_cast<std::size_t>(height) * width, 0);
}

std::size_t PixelMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void PixelMask::require_same_shape(const PixelMask& other) const {
  if (!same_shape(other)) throw DimensionError("pixel mask dimensions differ");
}

PixelMask& PixelMask::operator|=(const PixelMask& other) {
  require_same_shape(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

PixelMask& PixelMask::operator&=(const PixelMask& other) {
  require_same_shape(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

PixelMask& PixelMask::subtract(const PixelMask& other) {
  require_same_shape(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i]) bits_[i] = 0;
  }
  return *this;
}

PixelMask PixelMask::complement() const {
  PixelMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

DistanceMap::DistanceMap(int height, int width, int channels, std::vector<float> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  check_dims(height, width);
  check_channels(channels);
  if (values_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("distance map length does not match its dimensions");
  }
  const float limit = std::sqrt(static_cast<float>(channels)) * (1.0f + 1e-6f);
  for (float v : values_) {
    if (!(v >= 0.0f && v <= limit)) throw ConfigError("distance value outside [0, sqrt(C)]");
  }
}

Perturbation::Perturbation(int channels, std::vector<float> delta, PixelMask support)
    : channels_(channels), delta_(std::move(delta)), support_(std::move(support)) {}

Perturbation Perturbation::clipped(const ImageTensor& clean, std::span<const float> delta,
                                   const PixelMask& support) {
  const int h = clean.height();
  const int w = clean.width();
  const int c = clean.channels();
  if (support.height() != h || support.width() != w || delta.size() != clean.data().size()) {
    throw DimensionError("perturbation does not match image dimensions");
  }
  std::vector<float> out(delta.size(), 0.0f);
  const auto base = clean.data();
  for (std::size_t p = 0; p < support.size(); ++p) {
    if (!support.test_index(p)) continue;
    for (int k = 0; k < c; ++k) {
      const std::size_t i = p * c + k;
      const float v = std::clamp(base[i] + delta[i], 0.0f, 1.0f);
      out[i] = v - base[i];
    }
  }
  return Perturbation(c, std::move(out), support);
}

Perturbation Perturbation::between(const ImageTensor& clean, const ImageTensor& adv) {
  if (!clean.same_shape(adv)) throw DimensionError("perturbation endpoints differ in shape");
  const int c = clean.channels();
  PixelMask support(clean.height(), clean.width());
  std::vector<float> delta(clean.data().size());
  const auto a = clean.data();
  const auto b = adv.data();
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = b[i] - a[i];
    if (delta[i] != 0.0f) {
      const auto p = static_cast<int>(i / c);
      support.set(p / clean.width(), p % clean.width());
    }
  }
  return Perturbation(c, std::move(delta), std::move(support));
}

Perturbation Perturbation::raw(int height, int width, int channels, std::vector<float> delta) {
  check_channels(channels);
  PixelMask support(height, width);
  if (delta.size() != element_count(height, width, channels)) {
    throw DimensionError("perturbation length does not match its dimensions");
  }
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] != 0.0f) {
      const auto p = static_cast<int>(i / channels);
      support.set(p / width, p % width);
    }
  }
  return Perturbation(channels, std::move(delta), std::move(support));
}

}  // namespace superpure
