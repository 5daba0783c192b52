#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "superpure/image.hpp"
#include "superpure/purifier.hpp"

namespace superpure {

enum class PatchKind { localized, distributed };

std::string_view to_string(PatchKind k);
PatchKind parse_patch_kind(std::string_view s);

/// Square noise patches to inject. A region of side 0 is "no patch".
struct PatchSpec {
  PatchKind kind = PatchKind::localized;
  /// One side length per region, or a single entry shared by every region.
  std::vector<int> sizes{64};
  int count = 1;
  /// Noise scale: patched pixel = clip(clean + amplitude * U[-1, 1]).
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  /// Top-left (x, y) per region. Empty means random non-overlapping placement.
  std::vector<std::pair<int, int>> fixed_positions;

  int size_of(int region) const;
  /// Throws ConfigError for inconsistent fields or regions that cannot fit.
  void validate(int height, int width) const;
};

struct InjectedImage {
  ImageTensor image;
  PixelMask truth;
};

/// Applies seeded iid uniform noise on the spec's regions. Pixels outside
/// `truth` are copied unchanged.
InjectedImage inject(const ImageTensor& img, const PatchSpec& spec);

enum class Background { gradient, smooth_noise };

std::string_view to_string(Background b);
Background parse_background(std::string_view s);

/// Procedural clean images. `gradient` is a per-channel two-axis linear ramp
/// in [0.1, 0.9]; `smooth_noise` is two octaves of smoothstep value noise.
ImageTensor make_background(Background kind, int height, int width, int channels,
                            std::uint64_t seed);

struct MaskMetrics {
  /// Unset when the ground truth is empty.
  std::optional<double> patch_recall;
  double clean_false_rate = 0.0;
  int iterations = 0;
};

MaskMetrics eval_masking(const PixelMask& truth, const PixelMask& cumulative,
                         const IterationTrace& trace);

struct ReconErrorStats {
  double mse_patch = 0.0;
  double mse_clean = 0.0;
  /// Unset when mse_clean is zero.
  std::optional<double> ratio;
};

/// Squared error between `original` and `reconstructed`, averaged over all
/// channels of the truth pixels and of the remaining pixels separately.
ReconErrorStats recon_error_stats(const ImageTensor& original, const ImageTensor& reconstructed,
                                  const PixelMask& truth);

}  // namespace superpure
