#pragma once

#include <cstddef>

#include "superpure/image.hpp"

namespace superpure {

/// Box-averages every s x s window (area-weighted bilinear reduction).
///
/// Dimensions that are not a multiple of `s` are reflect-padded up to the
/// next multiple first, so the result is ceil(H/s) x ceil(W/s). Throws
/// ConfigError for s < 2 or s larger than either dimension.
ImageTensor downsample(const ImageTensor& img, int s);

/// Same reduction applied to a signed perturbation. The support of the
/// result marks every output pixel whose window touched the input support.
Perturbation downsample(const Perturbation& p, int s);

/// Squared L2 norm of the perturbation's delta.
double perturbation_energy(const Perturbation& p);

/// Per-pixel Euclidean distance over channels.
DistanceMap distance_map(const ImageTensor& a, const ImageTensor& b);

struct ThresholdResult {
  PixelMask newly;
  std::size_t count = 0;
};

/// Marks pixels with distance > lambda that are not already in `prior`.
/// `count` is the number of newly marked pixels only.
ThresholdResult threshold_mask(const DistanceMap& d, double lambda, const PixelMask& prior);

/// Zeroes every channel of masked pixels; other pixels are copied untouched.
ImageTensor apply_mask(const ImageTensor& img, const PixelMask& m);

/// Mirror-pads (edge not repeated) on the bottom/right to the given size.
ImageTensor reflect_pad(const ImageTensor& img, int height, int width);

/// Top-left crop.
ImageTensor crop(const ImageTensor& img, int height, int width);

}  // namespace superpure
