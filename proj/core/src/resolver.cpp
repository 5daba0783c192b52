#include "superpure/resolver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "superpure/errors.hpp"

namespace superpure {
namespace {

constexpr double kCubicA = -0.5;

double cubic(double x) {
  x = std::abs(x);
  if (x <= 1.0) return ((kCubicA + 2.0) * x - (kCubicA + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((kCubicA * x - 5.0 * kCubicA) * x + 8.0 * kCubicA) * x - 4.0 * kCubicA;
  return 0.0;
}

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> make_taps(int n, int f) {
  std::vector<Taps> taps(static_cast<std::size_t>(n) * f);
  for (int o = 0; o < n * f; ++o) {
    const double src = (o + 0.5) / f - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double t = src - base;
    auto& tap = taps[o];
    for (int k = 0; k < 4; ++k) {
      tap.index[k] = std::clamp(base - 1 + k, 0, n - 1);
      tap.weight[k] = cubic(t - (k - 1));
    }
  }
  return taps;
}

// Vertical pass over a [rows][cols][c] buffer.
std::vector<double> resample_rows(const std::vector<double>& src, int cols, int c,
                                  const std::vector<Taps>& taps) {
  const std::size_t row_len = static_cast<std::size_t>(cols) * c;
  std::vector<double> out(taps.size() * row_len, 0.0);
  for (std::size_t o = 0; o < taps.size(); ++o) {
    double* dst = out.data() + o * row_len;
    for (int k = 0; k < 4; ++k) {
      const double w = taps[o].weight[k];
      const double* row = src.data() + static_cast<std::size_t>(taps[o].index[k]) * row_len;
      for (std::size_t i = 0; i < row_len; ++i) dst[i] += w * row[i];
    }
  }
  return out;
}

std::vector<double> resample_cols(const std::vector<double>& src, int rows, int cols, int c,
                                  const std::vector<Taps>& taps) {
  const std::size_t out_cols = taps.size();
  std::vector<double> out(static_cast<std::size_t>(rows) * out_cols * c, 0.0);
  for (int y = 0; y < rows; ++y) {
    const double* row = src.data() + static_cast<std::size_t>(y) * cols * c;
    double* dst_row = out.data() + static_cast<std::size_t>(y) * out_cols * c;
    for (std::size_t o = 0; o < out_cols; ++o) {
      for (int k = 0; k < 4; ++k) {
        const double w = taps[o].weight[k];
        const double* px = row + static_cast<std::size_t>(taps[o].index[k]) * c;
        for (int ch = 0; ch < c; ++ch) dst_row[o * c + ch] += w * px[ch];
      }
    }
  }
  return out;
}

// Splits [0, n) into interior spans of `core` pixels.
std::vector<std::pair<int, int>> core_spans(int n, int core) {
  std::vector<std::pair<int, int>> spans;
  for (int start = 0; start < n; start += core) spans.emplace_back(start, std::min(start + core, n));
  return spans;
}

}  // namespace

bool SuperResolver::supports(int f) const {
  const auto s = scales();
  return std::find(s.begin(), s.end(), f) != s.end();
}

ImageTensor classical_upscale(const ImageTensor& img, int f) {
  if (f != 2 && f != 4) {
    throw ScaleMismatchError("classical backend supports factors 2 and 4, got " + std::to_string(f));
  }
  const int h = img.height();
  const int w = img.width();
  const int c = img.channels();
  std::vector<double> src(img.data().begin(), img.data().end());
  auto tall = resample_rows(src, w, c, make_taps(h, f));
  auto full = resample_cols(tall, h * f, w, c, make_taps(w, f));
  std::vector<float> out(full.size());
  std::transform(full.begin(), full.end(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return ImageTensor::clamped(h * f, w * f, c, std::move(out));
}

ImageTensor ClassicalResolver::upscale(const ImageTensor& img, int f) {
  return classical_upscale(img, f);
}

std::unique_ptr<SuperResolver> ClassicalResolver::clone() const {
  return std::make_unique<ClassicalResolver>();
}

ImageTensor tiled_upscale(SuperResolver& g, const ImageTensor& img, int f, int tile, int overlap) {
  if (overlap < 0 || tile <= 2 * overlap) {
    throw ConfigError("tile must exceed twice the overlap (tile " + std::to_string(tile) +
                      ", overlap " + std::to_string(overlap) + ")");
  }
  if (img.height() <= tile && img.width() <= tile) return g.upscale(img, f);

  const int c = img.channels();
  const int core = tile - 2 * overlap;
  const int out_w = img.width() * f;
  std::vector<float> out(static_cast<std::size_t>(img.height()) * f * out_w * c);

  for (const auto& [y0, y1] : core_spans(img.height(), core)) {
    const int wy0 = std::max(0, y0 - overlap);
    const int wy1 = std::min(img.height(), y1 + overlap);
    for (const auto& [x0, x1] : core_spans(img.width(), core)) {
      const int wx0 = std::max(0, x0 - overlap);
      const int wx1 = std::min(img.width(), x1 + overlap);

      std::vector<float> window;
      window.reserve(static_cast<std::size_t>(wy1 - wy0) * (wx1 - wx0) * c);
      for (int y = wy0; y < wy1; ++y) {
        const auto row = img.data().subspan(
            (static_cast<std::size_t>(y) * img.width() + wx0) * c,
            static_cast<std::size_t>(wx1 - wx0) * c);
        window.insert(window.end(), row.begin(), row.end());
      }
      const ImageTensor up =
          g.upscale(ImageTensor(wy1 - wy0, wx1 - wx0, c, std::move(window)), f);
      if (up.height() != (wy1 - wy0) * f || up.width() != (wx1 - wx0) * f) {
        throw ScaleMismatchError("backend returned a tile of unexpected size");
      }

      for (int y = y0 * f; y < y1 * f; ++y) {
        const auto src = up.data().subspan(
            (static_cast<std::size_t>(y - wy0 * f) * up.width() + (x0 - wx0) * f) * c,
            static_cast<std::size_t>(x1 - x0) * f * c);
        std::copy(src.begin(), src.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(
                                    (static_cast<std::size_t>(y) * out_w + x0 * f) * c));
      }
    }
  }
  return ImageTensor(img.height() * f, out_w, c, std::move(out));
}

TiledResolver::TiledResolver(std::unique_ptr<SuperResolver> inner, int tile, int overlap)
    : inner_(std::move(inner)), tile_(tile), overlap_(overlap) {
  if (!inner_) throw ConfigError("tiled resolver needs a backend");
  if (overlap_ < 0 || tile_ <= 2 * overlap_) {
    throw ConfigError("tile must exceed twice the overlap");
  }
}

ImageTensor TiledResolver::upscale(const ImageTensor& img, int f) {
  return tiled_upscale(*inner_, img, f, tile_, overlap_);
}

std::unique_ptr<SuperResolver> TiledResolver::clone() const {
  return std::make_unique<TiledResolver>(inner_->clone(), tile_, overlap_);
}

}  // namespace superpure
