#pragma once

#include <filesystem>

#include "superpure/image.hpp"

namespace superpure {

/// Loads an 8-bit PNG. Grayscale inputs stay single-channel, everything else
/// (palette, RGBA, 16-bit) is converted to 8-bit RGB. Values map by v/255.
ImageTensor load_png(const std::filesystem::path& path);

/// Writes an 8-bit grayscale or RGB PNG using round(v * 255).
void save_png(const std::filesystem::path& path, const ImageTensor& img);

/// Masks are single-channel PNGs: 0 = unmasked, 255 = masked. On load any
/// nonzero value counts as masked.
PixelMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const std::filesystem::path& path, const PixelMask& mask);

/// Maps an image through the 8-bit encoding used by save_png.
ImageTensor quantize_8bit(const ImageTensor& img);

}  // namespace superpure
