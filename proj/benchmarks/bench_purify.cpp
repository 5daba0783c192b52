#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "superpure/harness.hpp"
#include "superpure/neural_resolver.hpp"
#include "superpure/pixel_ops.hpp"
#include "superpure/purifier.hpp"
#include "superpure/resolver.hpp"

using namespace superpure;

namespace {

ImageTensor noise_image(int side) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(side));
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  std::vector<float> data(static_cast<std::size_t>(side) * side * 3);
  for (auto& v : data) v = uni(rng);
  return ImageTensor(side, side, 3, std::move(data));
}

void BM_Downsample(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(downsample(img, 4));
}
BENCHMARK(BM_Downsample)->Arg(224)->Arg(512);

void BM_ClassicalUpscale(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classical_upscale(img, 4));
}
BENCHMARK(BM_ClassicalUpscale)->Arg(56)->Arg(128);

void BM_Purify(benchmark::State& state) {
  Workload w;
  const auto image = make_workload_image(w, 0);
  ClassicalResolver g;
  PurifyConfig cfg;
  cfg.enhance = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(purify_plus(image.attacked.image, cfg, g));
}
BENCHMARK(BM_Purify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_NeuralUpscale(benchmark::State& state) {
  const auto model = std::filesystem::path(SUPERPURE_FIXTURE_DIR) / "models" / "tiny_x4.onnx";
  NeuralResolver g({ModelArtifact::load(model)});
  const auto img = noise_image(56);
  for (auto _ : state) benchmark::DoNotOptimize(g.upscale(img, 4));
}
BENCHMARK(BM_NeuralUpscale)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
