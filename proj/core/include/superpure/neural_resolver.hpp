#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "superpure/resolver.hpp"

namespace superpure {

/// A serialized generator (ONNX) plus its JSON sidecar
/// `{"scale": 2|4, "channels": 3, "version": "..."}`.
///
/// The sidecar shares the model's stem: `x4.onnx` -> `x4.json`.
struct ModelArtifact {
  std::filesystem::path model_path;
  int scale = 0;
  int channels = 0;
  std::string version;

  /// Reads and validates the sidecar. Throws ArtifactLoadError.
  static ModelArtifact load(const std::filesystem::path& model_path);
  static std::filesystem::path sidecar_path(const std::filesystem::path& model_path);
};

/// Runs one or more exported generators (one per scale) through OpenCV's
/// DNN module. Every artifact is probed at load with an 8x8 constant input;
/// a network whose output is not 8*scale on each side is rejected with
/// ScaleMismatchError.
///
/// Tensors are NCHW float RGB in [0,1]; outputs are clamped, not rescaled.
class NeuralResolver final : public SuperResolver {
 public:
  explicit NeuralResolver(std::vector<ModelArtifact> artifacts);
  static NeuralResolver from_paths(std::span<const std::filesystem::path> model_paths);

  ~NeuralResolver() override;
  NeuralResolver(NeuralResolver&&) noexcept;
  NeuralResolver& operator=(NeuralResolver&&) noexcept;

  std::string name() const override { return "neural"; }
  std::vector<int> scales() const override;
  ImageTensor upscale(const ImageTensor& img, int f) override;
  std::unique_ptr<SuperResolver> clone() const override;

  const ModelArtifact& artifact(int f) const;

 private:
  struct Loaded;
  explicit NeuralResolver(std::vector<std::shared_ptr<Loaded>> nets);

  std::vector<std::shared_ptr<Loaded>> nets_;
};

/// One-shot convenience: load `model` and upscale `img` by `f`.
ImageTensor neural_upscale(const ModelArtifact& model, const ImageTensor& img, int f);

}  // namespace superpure
