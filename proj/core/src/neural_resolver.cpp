#include "superpure/neural_resolver.hpp"

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "superpure/errors.hpp"

namespace superpure {

struct NeuralResolver::Loaded {
  ModelArtifact artifact;
  std::vector<uchar> bytes;
  cv::dnn::Net net;
};

namespace {

cv::dnn::Net parse_net(const std::vector<uchar>& bytes, const std::filesystem::path& path) {
  try {
    cv::dnn::Net net = cv::dnn::readNetFromONNX(bytes);
    if (net.empty()) throw ArtifactLoadError("empty network in " + path.string());
    net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
    return net;
  } catch (const cv::Exception& e) {
    throw ArtifactLoadError("cannot parse model " + path.string() + ": " + e.what());
  }
}

cv::Mat run(cv::dnn::Net& net, const ImageTensor& img) {
  const int h = img.height();
  const int w = img.width();
  const int c = img.channels();
  const int shape[] = {1, c, h, w};
  cv::Mat blob(4, shape, CV_32F);
  auto* dst = blob.ptr<float>();
  const auto src = img.data();
  for (int k = 0; k < c; ++k) {
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
      dst[static_cast<std::size_t>(k) * img.pixel_count() + p] = src[p * c + k];
    }
  }
  try {
    net.setInput(blob);
    return net.forward().clone();
  } catch (const cv::Exception& e) {
    throw InferenceError(std::string("inference failed: ") + e.what());
  }
}

}  // namespace

std::filesystem::path ModelArtifact::sidecar_path(const std::filesystem::path& model_path) {
  auto p = model_path;
  p.replace_extension(".json");
  return p;
}

ModelArtifact ModelArtifact::load(const std::filesystem::path& model_path) {
  if (!std::filesystem::is_regular_file(model_path)) {
    throw ArtifactLoadError("model file not found: " + model_path.string());
  }
  const auto sidecar = sidecar_path(model_path);
  std::ifstream in(sidecar);
  if (!in) throw ArtifactLoadError("model sidecar not found: " + sidecar.string());

  ModelArtifact a;
  a.model_path = model_path;
  try {
    const auto j = nlohmann::json::parse(in);
    a.scale = j.at("scale").get<int>();
    a.channels = j.at("channels").get<int>();
    a.version = j.at("version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactLoadError("malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  if (a.scale != 2 && a.scale != 4) {
    throw ArtifactLoadError("sidecar scale must be 2 or 4 in " + sidecar.string());
  }
  if (a.channels != 1 && a.channels != 3) {
    throw ArtifactLoadError("sidecar channels must be 1 or 3 in " + sidecar.string());
  }
  return a;
}

NeuralResolver::NeuralResolver(std::vector<ModelArtifact> artifacts) {
  if (artifacts.empty()) throw ArtifactLoadError("no model artifacts given");
  for (auto& artifact : artifacts) {
    for (const auto& existing : nets_) {
      if (existing->artifact.scale == artifact.scale) {
        throw ArtifactLoadError("two artifacts declare scale " + std::to_string(artifact.scale));
      }
    }
    std::ifstream in(artifact.model_path, std::ios::binary);
    if (!in) throw ArtifactLoadError("cannot open model " + artifact.model_path.string());
    auto loaded = std::make_shared<Loaded>();
    loaded->bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    loaded->net = parse_net(loaded->bytes, artifact.model_path);
    loaded->artifact = std::move(artifact);

    constexpr int kProbe = 8;
    const cv::Mat out = run(loaded->net, ImageTensor(kProbe, kProbe, loaded->artifact.channels, 0.5f));
    const int expect = kProbe * loaded->artifact.scale;
    if (out.dims != 4 || out.size[1] != loaded->artifact.channels || out.size[2] != expect ||
        out.size[3] != expect) {
      throw ScaleMismatchError("model " + loaded->artifact.model_path.string() + " declares x" +
                               std::to_string(loaded->artifact.scale) +
                               " but the probe output does not match");
    }
    nets_.push_back(std::move(loaded));
  }
}

NeuralResolver::NeuralResolver(std::vector<std::shared_ptr<Loaded>> nets) : nets_(std::move(nets)) {}

NeuralResolver NeuralResolver::from_paths(std::span<const std::filesystem::path> model_paths) {
  std::vector<ModelArtifact> artifacts;
  for (const auto& p : model_paths) artifacts.push_back(ModelArtifact::load(p));
  return NeuralResolver(std::move(artifacts));
}

NeuralResolver::~NeuralResolver() = default;
NeuralResolver::NeuralResolver(NeuralResolver&&) noexcept = default;
NeuralResolver& NeuralResolver::operator=(NeuralResolver&&) noexcept = default;

std::vector<int> NeuralResolver::scales() const {
  std::vector<int> out;
  for (const auto& n : nets_) out.push_back(n->artifact.scale);
  return out;
}

const ModelArtifact& NeuralResolver::artifact(int f) const {
  for (const auto& n : nets_) {
    if (n->artifact.scale == f) return n->artifact;
  }
  throw ScaleMismatchError("no model artifact for scale " + std::to_string(f));
}

ImageTensor NeuralResolver::upscale(const ImageTensor& img, int f) {
  Loaded* loaded = nullptr;
  for (const auto& n : nets_) {
    if (n->artifact.scale == f) loaded = n.get();
  }
  if (loaded == nullptr) throw ScaleMismatchError("no model artifact for scale " + std::to_string(f));
  if (img.channels() != loaded->artifact.channels) {
    throw DimensionError("model expects " + std::to_string(loaded->artifact.channels) +
                         " channels, image has " + std::to_string(img.channels()));
  }

  const cv::Mat out = run(loaded->net, img);
  const int oh = img.height() * f;
  const int ow = img.width() * f;
  const int c = img.channels();
  if (out.dims != 4 || out.size[1] != c || out.size[2] != oh || out.size[3] != ow) {
    throw InferenceError("model output shape does not match x" + std::to_string(f));
  }
  const std::size_t plane = static_cast<std::size_t>(oh) * ow;
  const float* src = out.ptr<float>();
  std::vector<float> data(plane * c);
  for (std::size_t p = 0; p < plane; ++p) {
    for (int k = 0; k < c; ++k) data[p * c + k] = src[static_cast<std::size_t>(k) * plane + p];
  }
  return ImageTensor::clamped(oh, ow, c, std::move(data));
}

std::unique_ptr<SuperResolver> NeuralResolver::clone() const {
  std::vector<std::shared_ptr<Loaded>> copies;
  for (const auto& n : nets_) {
    auto copy = std::make_shared<Loaded>();
    copy->artifact = n->artifact;
    copy->bytes = n->bytes;
    copy->net = parse_net(copy->bytes, copy->artifact.model_path);
    copies.push_back(std::move(copy));
  }
  return std::unique_ptr<SuperResolver>(new NeuralResolver(std::move(copies)));
}

ImageTensor neural_upscale(const ModelArtifact& model, const ImageTensor& img, int f) {
  if (f != model.scale) {
    throw ScaleMismatchError("requested x" + std::to_string(f) + " from an x" +
                             std::to_string(model.scale) + " artifact");
  }
  NeuralResolver resolver({model});
  return resolver.upscale(img, f);
}

}  // namespace superpure
