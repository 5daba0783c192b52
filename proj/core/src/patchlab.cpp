#include "superpure/patchlab.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "superpure/errors.hpp"

namespace superpure {
namespace {

constexpr int kPlacementAttempts = 10000;

bool overlaps(const PixelMask& taken, int x0, int y0, int size) {
  for (int y = y0; y < y0 + size; ++y) {
    for (int x = x0; x < x0 + size; ++x) {
      if (taken.test(y, x)) return true;
    }
  }
  return false;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Value noise on a lattice with `cell`-pixel spacing, in [0, 1].
std::vector<double> value_noise(int height, int width, int cell, std::mt19937_64& rng) {
  const int gh = height / cell + 2;
  const int gw = width / cell + 2;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
  for (auto& v : lattice) v = uni(rng);
  auto at = [&](int gy, int gx) { return lattice[static_cast<std::size_t>(gy) * gw + gx]; };

  std::vector<double> out(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    const int gy = y / cell;
    const double ty = smoothstep(static_cast<double>(y % cell) / cell);
    for (int x = 0; x < width; ++x) {
      const int gx = x / cell;
      const double tx = smoothstep(static_cast<double>(x % cell) / cell);
      const double top = at(gy, gx) + (at(gy, gx + 1) - at(gy, gx)) * tx;
      const double bottom = at(gy + 1, gx) + (at(gy + 1, gx + 1) - at(gy + 1, gx)) * tx;
      out[static_cast<std::size_t>(y) * width + x] = top + (bottom - top) * ty;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(PatchKind k) {
  return k == PatchKind::localized ? "localized" : "distributed";
}

PatchKind parse_patch_kind(std::string_view s) {
  if (s == "localized") return PatchKind::localized;
  if (s == "distributed") return PatchKind::distributed;
  throw ConfigError("patch kind must be localized or distributed, got " + std::string(s));
}

std::string_view to_string(Background b) {
  return b == Background::gradient ? "gradient" : "smooth_noise";
}

Background parse_background(std::string_view s) {
  if (s == "gradient") return Background::gradient;
  if (s == "smooth_noise") return Background::smooth_noise;
  throw ConfigError("background must be gradient or smooth_noise, got " + std::string(s));
}

int PatchSpec::size_of(int region) const {
  return sizes.size() == 1 ? sizes.front() : sizes.at(static_cast<std::size_t>(region));
}

void PatchSpec::validate(int height, int width) const {
  if (kind == PatchKind::localized && count != 1) {
    throw ConfigError("a localized patch has exactly one region");
  }
  if (kind == PatchKind::distributed && count < 2) {
    throw ConfigError("a distributed patch needs at least two regions");
  }
  if (sizes.size() != 1 && sizes.size() != static_cast<std::size_t>(count)) {
    throw ConfigError("patch sizes must have one entry or one per region");
  }
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw ConfigError("patch amplitude must be in [0,1]");
  if (!fixed_positions.empty() && fixed_positions.size() != static_cast<std::size_t>(count)) {
    throw ConfigError("fixed placement needs one position per region");
  }
  std::size_t area = 0;
  for (int r = 0; r < count; ++r) {
    const int size = size_of(r);
    if (size < 0) throw ConfigError("patch size must be non-negative");
    if (size > height || size > width) {
      throw ConfigError("patch of side " + std::to_string(size) + " exceeds image bounds");
    }
    if (!fixed_positions.empty()) {
      const auto [x, y] = fixed_positions[static_cast<std::size_t>(r)];
      if (x < 0 || y < 0 || x + size > width || y + size > height) {
        throw ConfigError("patch region " + std::to_string(r) + " exceeds image bounds");
      }
    }
    area += static_cast<std::size_t>(size) * size;
  }
  if (area > static_cast<std::size_t>(height) * width) {
    throw ConfigError("patch regions cover more than the image");
  }
}

InjectedImage inject(const ImageTensor& img, const PatchSpec& spec) {
  spec.validate(img.height(), img.width());
  std::mt19937_64 rng(spec.seed);

  PixelMask truth(img.height(), img.width());
  std::vector<std::pair<int, int>> origins;
  for (int r = 0; r < spec.count; ++r) {
    const int size = spec.size_of(r);
    if (size == 0) {
      origins.emplace_back(0, 0);
      continue;
    }
    int x0 = 0;
    int y0 = 0;
    if (!spec.fixed_positions.empty()) {
      std::tie(x0, y0) = spec.fixed_positions[static_cast<std::size_t>(r)];
      if (overlaps(truth, x0, y0, size)) throw ConfigError("fixed patch regions overlap");
    } else {
      std::uniform_int_distribution<int> ys(0, img.height() - size);
      std::uniform_int_distribution<int> xs(0, img.width() - size);
      int attempt = 0;
      do {
        if (++attempt > kPlacementAttempts) {
          throw ConfigError("could not place non-overlapping patch regions");
        }
        y0 = ys(rng);
        x0 = xs(rng);
      } while (overlaps(truth, x0, y0, size));
    }
    for (int y = y0; y < y0 + size; ++y) {
      for (int x = x0; x < x0 + size; ++x) truth.set(y, x);
    }
    origins.emplace_back(x0, y0);
  }

  ImageTensor out = img;
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  for (int r = 0; r < spec.count; ++r) {
    const int size = spec.size_of(r);
    const auto [x0, y0] = origins[static_cast<std::size_t>(r)];
    for (int y = y0; y < y0 + size; ++y) {
      for (int x = x0; x < x0 + size; ++x) {
        for (int c = 0; c < img.channels(); ++c) {
          out.set(y, x, c, static_cast<float>(img.at(y, x, c) + spec.amplitude * noise(rng)));
        }
      }
    }
  }
  return {std::move(out), std::move(truth)};
}

ImageTensor make_background(Background kind, int height, int width, int channels,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> level(0.1, 0.9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<float> data(static_cast<std::size_t>(height) * width * channels);

  for (int c = 0; c < channels; ++c) {
    if (kind == Background::gradient) {
      const double lo = level(rng);
      const double hi = level(rng);
      const double wx = unit(rng);
      const double sx = width > 1 ? 1.0 / (width - 1) : 0.0;
      const double sy = height > 1 ? 1.0 / (height - 1) : 0.0;
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const double t = wx * x * sx + (1.0 - wx) * y * sy;
          data[(static_cast<std::size_t>(y) * width + x) * channels + c] =
              static_cast<float>(lo + (hi - lo) * t);
        }
      }
    } else {
      const auto coarse = value_noise(height, width, 64, rng);
      const auto fine = value_noise(height, width, 16, rng);
      for (std::size_t p = 0; p < coarse.size(); ++p) {
        const double v = (2.0 * coarse[p] + fine[p]) / 3.0;
        data[p * channels + c] = static_cast<float>(0.1 + 0.8 * v);
      }
    }
  }
  return ImageTensor::clamped(height, width, channels, std::move(data));
}

MaskMetrics eval_masking(const PixelMask& truth, const PixelMask& cumulative,
                         const IterationTrace& trace) {
  if (!truth.same_shape(cumulative)) throw DimensionError("eval_masking: mask dimensions differ");
  std::size_t truth_count = 0;
  std::size_t hit = 0;
  std::size_t false_masked = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth.test_index(i);
    const bool m = cumulative.test_index(i);
    truth_count += t;
    hit += t && m;
    false_masked += !t && m;
  }
  MaskMetrics metrics;
  if (truth_count > 0) metrics.patch_recall = static_cast<double>(hit) / truth_count;
  const std::size_t clean = truth.size() - truth_count;
  metrics.clean_false_rate = clean > 0 ? static_cast<double>(false_masked) / clean : 0.0;
  metrics.iterations = trace.total_iterations();
  return metrics;
}

ReconErrorStats recon_error_stats(const ImageTensor& original, const ImageTensor& reconstructed,
                                  const PixelMask& truth) {
  if (!original.same_shape(reconstructed) || truth.height() != original.height() ||
      truth.width() != original.width()) {
    throw DimensionError("recon_error_stats: dimensions differ");
  }
  const int c = original.channels();
  const auto a = original.data();
  const auto b = reconstructed.data();
  double patch_sum = 0.0;
  double clean_sum = 0.0;
  std::size_t patch_n = 0;
  std::size_t clean_n = 0;
  for (std::size_t p = 0; p < truth.size(); ++p) {
    double sq = 0.0;
    for (int k = 0; k < c; ++k) {
      const double d = static_cast<double>(a[p * c + k]) - b[p * c + k];
      sq += d * d;
    }
    if (truth.test_index(p)) {
      patch_sum += sq;
      patch_n += c;
    } else {
      clean_sum += sq;
      clean_n += c;
    }
  }
  ReconErrorStats stats;
  stats.mse_patch = patch_n > 0 ? patch_sum / patch_n : 0.0;
  stats.mse_clean = clean_n > 0 ? clean_sum / clean_n : 0.0;
  if (stats.mse_clean > 0.0) stats.ratio = stats.mse_patch / stats.mse_clean;
  return stats;
}

}  // namespace superpure
