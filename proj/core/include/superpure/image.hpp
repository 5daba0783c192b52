#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace superpure {

/// H x W x C image with interleaved, row-major float channels in [0,1].
///
/// Values are validated on construction: `ImageTensor(h, w, c, data)` rejects
/// anything outside [0,1] (including NaN), `ImageTensor::clamped` clamps.
/// Only 1- and 3-channel images are supported.
class ImageTensor {
 public:
  ImageTensor(int height, int width, int channels, float fill = 0.0f);
  ImageTensor(int height, int width, int channels, std::vector<float> data);

  static ImageTensor clamped(int height, int width, int channels, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

  float at(int y, int x, int c) const { return data_[index(y, x, c)]; }
  /// Writes a value, clamping it into [0,1].
  void set(int y, int x, int c, float v);

  std::span<const float> data() const { return data_; }
  std::span<const float> pixel(int y, int x) const {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }

  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_;
  int width_;
  int channels_;
  std::vector<float> data_;
};

/// Binary H x W map; a set bit marks a suppressed pixel.
class PixelMask {
 public:
  PixelMask(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool test(int y, int x) const { return bits_[index(y, x)] != 0; }
  void set(int y, int x, bool on = true) { bits_[index(y, x)] = on ? 1 : 0; }
  bool test_index(std::size_t i) const { return bits_[i] != 0; }

  std::size_t popcount() const;
  bool empty() const { return popcount() == 0; }

  PixelMask& operator|=(const PixelMask& other);
  PixelMask& operator&=(const PixelMask& other);
  /// Clears every bit that is set in `other`.
  PixelMask& subtract(const PixelMask& other);
  PixelMask complement() const;

  bool same_shape(const PixelMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend PixelMask operator|(PixelMask a, const PixelMask& b) { return a |= b; }
  friend PixelMask operator&(PixelMask a, const PixelMask& b) { return a &= b; }
  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width_ + x; }
  void require_same_shape(const PixelMask& other) const;

  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

/// Per-pixel L2 distances between two images with `channels` channels.
/// Every value lies in [0, sqrt(channels)].
class DistanceMap {
 public:
  DistanceMap(int height, int width, int channels, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  float at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const float> values() const { return values_; }

 private:
  int height_;
  int width_;
  int channels_;
  std::vector<float> values_;
};

/// Signed additive perturbation and the set of pixels it touches.
class Perturbation {
 public:
  /// Builds the perturbation that takes `clean` to clip(clean + delta) on
  /// `support`; delta outside the support is dropped.
  static Perturbation clipped(const ImageTensor& clean, std::span<const float> delta,
                              const PixelMask& support);
  /// adv - clean; support is every pixel where any channel differs.
  static Perturbation between(const ImageTensor& clean, const ImageTensor& adv);
  /// Raw delta without clipping against an image. Used for energy analysis.
  static Perturbation raw(int height, int width, int channels, std::vector<float> delta);

  int height() const { return support_.height(); }
  int width() const { return support_.width(); }
  int channels() const { return channels_; }
  std::span<const float> delta() const { return delta_; }
  const PixelMask& support() const { return support_; }

 private:
  Perturbation(int channels, std::vector<float> delta, PixelMask support);

  int channels_;
  std::vector<float> delta_;
  PixelMask support_;
};

}  // namespace superpure
