#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superpure/kv_config.hpp"
#include "superpure/patchlab.hpp"
#include "superpure/purifier.hpp"
#include "superpure/resolver.hpp"

namespace superpure {

/// A seeded batch of clean images with injected patches.
///
/// Image i uses seed `seed + i`: the background is drawn from that seed and
/// the patch from a mixed copy of it, so both are reproducible per image.
/// With `image_dir` set, clean images are the directory's PNGs in
/// lexicographic order (cycled when `images` exceeds their number).
struct Workload {
  Background background = Background::gradient;
  int height = 224;
  int width = 224;
  int channels = 3;
  int images = 1;
  std::uint64_t seed = 0;
  PatchSpec patch;
  std::filesystem::path image_dir;

  void validate() const;
};

/// Keys: background, height, width, channels, images, seed, kind, size
/// (or sizes = a,b,...), count, amplitude, placement (random | x,y;x,y...),
/// image_dir.
Workload workload_from_config(const KeyValues& kv);

struct WorkloadImage {
  std::string label;
  std::uint64_t seed = 0;
  ImageTensor clean;
  InjectedImage attacked;
};

WorkloadImage make_workload_image(const Workload& w, int index);

struct EvalRow {
  std::string input;
  int size = 0;
  std::uint64_t seed = 0;
  MaskMetrics metrics;
  double ms = 0.0;
};

/// inject -> purify_plus -> eval_masking for every workload image. Rows are
/// in workload order regardless of `workers`; each worker uses its own clone
/// of `g`.
std::vector<EvalRow> evaluate(const Workload& w, const PurifyConfig& cfg, const SuperResolver& g,
                              int workers = 1);

struct SweepRow {
  double param = 0.0;
  std::optional<double> mean_recall;
  double mean_false_rate = 0.0;
  double mean_iterations = 0.0;
  int images = 0;
};

std::vector<SweepRow> sweep_lambda(const Workload& w, const std::vector<double>& lambdas,
                                   const PurifyConfig& cfg, const SuperResolver& g,
                                   int workers = 1);

/// Size 0 evaluates clean images (no patch); mean_recall is then unset.
std::vector<SweepRow> sweep_patch_size(const Workload& w, const std::vector<int>& sizes,
                                       const PurifyConfig& cfg, const SuperResolver& g,
                                       int workers = 1);

/// CSV columns: input,size,seed,recall,false_rate,iterations,ms
void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);
nlohmann::json eval_to_json(const std::vector<EvalRow>& rows);

/// CSV columns: <param_name>,recall,false_rate,iterations,images
void write_sweep_csv(std::ostream& out, const std::string& param_name,
                     const std::vector<SweepRow>& rows);
nlohmann::json sweep_to_json(const std::string& param_name, const std::vector<SweepRow>& rows);

}  // namespace superpure
