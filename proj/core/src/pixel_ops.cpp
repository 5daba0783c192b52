#include "superpure/pixel_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "superpure/errors.hpp"

namespace superpure {
namespace {

void check_scale(int s, int height, int width) {
  if (s < 2) throw ConfigError("downsample factor must be >= 2, got " + std::to_string(s));
  if (s > height || s > width) {
    throw ConfigError("downsample factor " + std::to_string(s) + " exceeds image dimensions " +
                      std::to_string(height) + "x" + std::to_string(width));
  }
}

int round_up(int n, int s) { return (n + s - 1) / s * s; }

int reflect(int i, int n) {
  if (i < n) return i;
  return 2 * n - 2 - i;
}

// Box average over s x s windows with reflected out-of-range rows/columns.
std::vector<float> box_average(std::span<const float> src, int height, int width, int channels,
                               int s) {
  const int out_h = round_up(height, s) / s;
  const int out_w = round_up(width, s) / s;
  std::vector<float> out(static_cast<std::size_t>(out_h) * out_w * channels);
  std::vector<double> acc(channels);
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = 0; dy < s; ++dy) {
        const int y = reflect(oy * s + dy, height);
        for (int dx = 0; dx < s; ++dx) {
          const int x = reflect(ox * s + dx, width);
          const float* px = src.data() + (static_cast<std::size_t>(y) * width + x) * channels;
          for (int c = 0; c < channels; ++c) acc[c] += px[c];
        }
      }
      float* dst = out.data() + (static_cast<std::size_t>(oy) * out_w + ox) * channels;
      for (int c = 0; c < channels; ++c) dst[c] = static_cast<float>(acc[c] * inv);
    }
  }
  return out;
}

}  // namespace

ImageTensor downsample(const ImageTensor& img, int s) {
  check_scale(s, img.height(), img.width());
  auto out = box_average(img.data(), img.height(), img.width(), img.channels(), s);
  return ImageTensor::clamped(round_up(img.height(), s) / s, round_up(img.width(), s) / s,
                              img.channels(), std::move(out));
}

Perturbation downsample(const Perturbation& p, int s) {
  check_scale(s, p.height(), p.width());
  auto out = box_average(p.delta(), p.height(), p.width(), p.channels(), s);
  return Perturbation::raw(round_up(p.height(), s) / s, round_up(p.width(), s) / s,
                           p.channels(), std::move(out));
}

double perturbation_energy(const Perturbation& p) {
  double sum = 0.0;
  for (float v : p.delta()) sum += static_cast<double>(v) * v;
  return sum;
}

DistanceMap distance_map(const ImageTensor& a, const ImageTensor& b) {
  if (!a.same_shape(b)) throw DimensionError("distance_map: image dimensions differ");
  const int c = a.channels();
  const float limit = std::sqrt(static_cast<float>(c));
  std::vector<float> values(a.pixel_count());
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t p = 0; p < values.size(); ++p) {
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
      const double diff = static_cast<double>(da[p * c + k]) - db[p * c + k];
      sum += diff * diff;
    }
    values[p] = std::min(static_cast<float>(std::sqrt(sum)), limit);
  }
  return DistanceMap(a.height(), a.width(), c, std::move(values));
}

ThresholdResult threshold_mask(const DistanceMap& d, double lambda, const PixelMask& prior) {
  const double limit = std::sqrt(static_cast<double>(d.channels()));
  if (!(lambda > 0.0 && lambda < limit)) {
    throw ConfigError("threshold lambda must lie in (0, sqrt(C)), got " + std::to_string(lambda));
  }
  if (prior.height() != d.height() || prior.width() != d.width()) {
    throw DimensionError("threshold_mask: prior mask does not match distance map");
  }
  ThresholdResult result{PixelMask(d.height(), d.width()), 0};
  const auto values = d.values();
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (prior.test(y, x)) continue;
      if (values[static_cast<std::size_t>(y) * d.width() + x] > lambda) {
        result.newly.set(y, x);
        ++result.count;
      }
    }
  }
  return result;
}

ImageTensor apply_mask(const ImageTensor& img, const PixelMask& m) {
  if (m.height() != img.height() || m.width() != img.width()) {
    throw DimensionError("apply_mask: mask does not match image");
  }
  std::vector<float> out(img.data().begin(), img.data().end());
  const int c = img.channels();
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (!m.test_index(p)) continue;
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(p * c), c, 0.0f);
  }
  return ImageTensor(img.height(), img.width(), c, std::move(out));
}

ImageTensor reflect_pad(const ImageTensor& img, int height, int width) {
  if (height < img.height() || width < img.width()) {
    throw DimensionError("reflect_pad: target smaller than image");
  }
  if (height - img.height() >= img.height() || width - img.width() >= img.width()) {
    throw DimensionError("reflect_pad: padding must be smaller than the image");
  }
  const int c = img.channels();
  std::vector<float> out(static_cast<std::size_t>(height) * width * c);
  for (int y = 0; y < height; ++y) {
    const int sy = reflect(y, img.height());
    for (int x = 0; x < width; ++x) {
      const auto src = img.pixel(sy, reflect(x, img.width()));
      std::copy(src.begin(), src.end(),
                out.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(y) * width + x) * c));
    }
  }
  return ImageTensor(height, width, c, std::move(out));
}

ImageTensor crop(const ImageTensor& img, int height, int width) {
  if (height > img.height() || width > img.width()) {
    throw DimensionError("crop: target larger than image");
  }
  if (height == img.height() && width == img.width()) return img;
  const int c = img.channels();
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(height) * width * c);
  for (int y = 0; y < height; ++y) {
    const auto row = img.data().subspan(static_cast<std::size_t>(y) * img.width() * c,
                                        static_cast<std::size_t>(width) * c);
    out.insert(out.end(), row.begin(), row.end());
  }
  return ImageTensor(height, width, c, std::move(out));
}

}  // namespace superpure
