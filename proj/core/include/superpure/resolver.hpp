#pragma once

#include <memory>
#include <string>
#include <vector>

#include "superpure/image.hpp"

namespace superpure {

/// Super-resolution backend: upscales whole images by an integer factor.
///
/// Implementations return exactly (H*f, W*f, C), clamp into [0,1] and are
/// deterministic for a fixed backend state. A handle serves one inference at
/// a time; use clone() to get an independent handle per worker.
class SuperResolver {
 public:
  virtual ~SuperResolver() = default;

  virtual std::string name() const = 0;
  virtual std::vector<int> scales() const = 0;
  virtual ImageTensor upscale(const ImageTensor& img, int f) = 0;
  virtual std::unique_ptr<SuperResolver> clone() const = 0;

  bool supports(int f) const;
};

/// Bicubic (Keys, a = -0.5) interpolation with pixel-centre alignment and
/// replicated borders. f must be 2 or 4.
ImageTensor classical_upscale(const ImageTensor& img, int f);

class ClassicalResolver final : public SuperResolver {
 public:
  std::string name() const override { return "classical"; }
  std::vector<int> scales() const override { return {2, 4}; }
  ImageTensor upscale(const ImageTensor& img, int f) override;
  std::unique_ptr<SuperResolver> clone() const override;
};

inline constexpr int kDefaultTile = 256;
inline constexpr int kDefaultOverlap = 16;

/// Memory-bounded upscaling. The input is split into windows of at most
/// `tile` pixels per side; neighbouring windows share `overlap` pixels of
/// context on each side and only each window's interior is kept. Inputs no
/// larger than one tile go through a single upscale call.
ImageTensor tiled_upscale(SuperResolver& g, const ImageTensor& img, int f,
                          int tile = kDefaultTile, int overlap = kDefaultOverlap);

/// Wraps a backend so that every upscale goes through tiled_upscale.
class TiledResolver final : public SuperResolver {
 public:
  TiledResolver(std::unique_ptr<SuperResolver> inner, int tile = kDefaultTile,
                int overlap = kDefaultOverlap);

  std::string name() const override { return inner_->name(); }
  std::vector<int> scales() const override { return inner_->scales(); }
  ImageTensor upscale(const ImageTensor& img, int f) override;
  std::unique_ptr<SuperResolver> clone() const override;

 private:
  std::unique_ptr<SuperResolver> inner_;
  int tile_;
  int overlap_;
};

}  // namespace superpure
