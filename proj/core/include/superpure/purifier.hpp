#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "superpure/image.hpp"
#include "superpure/resolver.hpp"

namespace superpure {

enum class EpsilonMode { count, fraction };
enum class Ordering { down_up, up_down };
enum class StopReason { converged, max_iters };

std::string_view to_string(EpsilonMode m);
std::string_view to_string(Ordering o);
std::string_view to_string(StopReason r);
EpsilonMode parse_epsilon_mode(std::string_view s);
Ordering parse_ordering(std::string_view s);
StopReason parse_stop_reason(std::string_view s);

/// Parameters of the masking loop and the enhancement pass.
///
/// `epsilon` is either an absolute count of newly masked pixels or a
/// fraction of H*W, depending on `epsilon_mode`. Iteration stops as soon as
/// the newly masked amount falls strictly below it.
struct PurifyConfig {
  double lambda = 0.7;
  double epsilon = 4.0;
  EpsilonMode epsilon_mode = EpsilonMode::count;
  int max_iters = 30;
  int mask_scale = 4;
  int enhance_scale = 2;
  bool enhance = false;
  Ordering ordering = Ordering::down_up;

  /// Throws ConfigError unless 0 < lambda < sqrt(channels), max_iters >= 1,
  /// epsilon >= 0 and both scales are 2 or 4.
  void validate(int channels) const;
};

struct IterationRecord {
  int t = 0;
  std::size_t newly_masked = 0;
  std::size_t cumulative_masked = 0;
  double cumulative_fraction = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct IterationTrace {
  std::vector<IterationRecord> iterations;
  StopReason stop_reason = StopReason::max_iters;

  int total_iterations() const { return static_cast<int>(iterations.size()); }
  std::size_t cumulative_masked() const {
    return iterations.empty() ? 0 : iterations.back().cumulative_masked;
  }

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

/// `{"iterations":[{"t":1,"new":..,"cum":..,"frac":..}],"stop_reason":"converged","total":N}`
nlohmann::json to_json(const IterationTrace& trace);
IterationTrace trace_from_json(const nlohmann::json& j);

struct PurifyResult {
  ImageTensor image;
  PixelMask mask;  // cumulative
  IterationTrace trace;
};

/// One rescaling round at `scale`: downsample then super-resolve (down_up),
/// or super-resolve then downsample (up_down). Output matches input dims.
ImageTensor reconstruct(const ImageTensor& img, int scale, Ordering ordering, SuperResolver& g);

/// Iterative masking. Each iteration reconstructs the current, already
/// masked image, masks pixels whose reconstruction distance exceeds lambda
/// and stops once the newly masked amount drops below epsilon or after
/// max_iters iterations. Backend failures are rethrown with the iteration
/// number prepended.
PurifyResult purify(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g);

/// Super-resolve by enhance_scale, then downsample back. No masking.
ImageTensor enhance(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g);

/// purify, followed by enhance when cfg.enhance is set. The trace and mask
/// come from the masking loop only.
PurifyResult purify_plus(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g);

}  // namespace superpure
