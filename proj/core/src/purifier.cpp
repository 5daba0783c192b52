#include "superpure/purifier.hpp"

#include <cmath>
#include <string>

#include "superpure/errors.hpp"
#include "superpure/pixel_ops.hpp"

namespace superpure {
namespace {

bool stop_now(std::size_t newly, std::size_t pixels, const PurifyConfig& cfg) {
  if (cfg.epsilon_mode == EpsilonMode::count) return static_cast<double>(newly) < cfg.epsilon;
  return static_cast<double>(newly) / static_cast<double>(pixels) < cfg.epsilon;
}

template <typename Fn>
auto with_iteration_context(int t, Fn&& fn) {
  const auto prefix = [t](const std::exception& e) {
    return "iteration " + std::to_string(t) + ": " + e.what();
  };
  try {
    return fn();
  } catch (const ArtifactLoadError& e) {
    throw ArtifactLoadError(prefix(e));
  } catch (const ScaleMismatchError& e) {
    throw ScaleMismatchError(prefix(e));
  } catch (const InferenceError& e) {
    throw InferenceError(prefix(e));
  } catch (const BackendError& e) {
    throw BackendError(prefix(e));
  }
}

}  // namespace

std::string_view to_string(EpsilonMode m) {
  return m == EpsilonMode::count ? "count" : "fraction";
}

std::string_view to_string(Ordering o) {
  return o == Ordering::down_up ? "down_up" : "up_down";
}

std::string_view to_string(StopReason r) {
  return r == StopReason::converged ? "converged" : "max_iters";
}

EpsilonMode parse_epsilon_mode(std::string_view s) {
  if (s == "count") return EpsilonMode::count;
  if (s == "fraction") return EpsilonMode::fraction;
  throw ConfigError("epsilon mode must be count or fraction, got " + std::string(s));
}

Ordering parse_ordering(std::string_view s) {
  if (s == "down_up") return Ordering::down_up;
  if (s == "up_down") return Ordering::up_down;
  throw ConfigError("ordering must be down_up or up_down, got " + std::string(s));
}

StopReason parse_stop_reason(std::string_view s) {
  if (s == "converged") return StopReason::converged;
  if (s == "max_iters") return StopReason::max_iters;
  throw ConfigError("unknown stop reason " + std::string(s));
}

void PurifyConfig::validate(int channels) const {
  const double limit = std::sqrt(static_cast<double>(channels));
  if (!(lambda > 0.0 && lambda < limit)) {
    throw ConfigError("lambda must lie in (0, " + std::to_string(limit) + "), got " +
                      std::to_string(lambda));
  }
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (mask_scale != 2 && mask_scale != 4) throw ConfigError("mask scale must be 2 or 4");
  if (enhance_scale != 2 && enhance_scale != 4) throw ConfigError("enhance scale must be 2 or 4");
}

nlohmann::json to_json(const IterationTrace& trace) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& r : trace.iterations) {
    iterations.push_back({{"t", r.t},
                          {"new", r.newly_masked},
                          {"cum", r.cumulative_masked},
                          {"frac", r.cumulative_fraction}});
  }
  return {{"iterations", std::move(iterations)},
          {"stop_reason", std::string(to_string(trace.stop_reason))},
          {"total", trace.total_iterations()}};
}

IterationTrace trace_from_json(const nlohmann::json& j) {
  IterationTrace trace;
  for (const auto& r : j.at("iterations")) {
    trace.iterations.push_back({r.at("t").get<int>(), r.at("new").get<std::size_t>(),
                                r.at("cum").get<std::size_t>(), r.at("frac").get<double>()});
  }
  trace.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
  if (j.at("total").get<int>() != trace.total_iterations()) {
    throw ConfigError("trace total does not match its iteration records");
  }
  return trace;
}

ImageTensor reconstruct(const ImageTensor& img, int scale, Ordering ordering, SuperResolver& g) {
  if (ordering == Ordering::up_down) return downsample(g.upscale(img, scale), scale);
  const ImageTensor up = g.upscale(downsample(img, scale), scale);
  return crop(up, img.height(), img.width());
}

PurifyResult purify(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g) {
  cfg.validate(x.channels());
  if (!g.supports(cfg.mask_scale)) {
    throw ScaleMismatchError("backend " + g.name() + " does not support x" +
                             std::to_string(cfg.mask_scale));
  }

  PurifyResult result{x, PixelMask(x.height(), x.width()), {}};
  const std::size_t pixels = x.pixel_count();
  for (int t = 1; t <= cfg.max_iters; ++t) {
    const ImageTensor rec = with_iteration_context(
        t, [&] { return reconstruct(result.image, cfg.mask_scale, cfg.ordering, g); });
    auto [newly, count] = threshold_mask(distance_map(result.image, rec), cfg.lambda, result.mask);
    if (count > 0) {
      result.mask |= newly;
      result.image = apply_mask(result.image, newly);
    }
    const std::size_t cumulative = result.trace.cumulative_masked() + count;
    result.trace.iterations.push_back(
        {t, count, cumulative, static_cast<double>(cumulative) / static_cast<double>(pixels)});
    if (stop_now(count, pixels, cfg)) {
      result.trace.stop_reason = StopReason::converged;
      return result;
    }
  }
  result.trace.stop_reason = StopReason::max_iters;
  return result;
}

ImageTensor enhance(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g) {
  if (!g.supports(cfg.enhance_scale)) {
    throw ScaleMismatchError("backend " + g.name() + " does not support x" +
                             std::to_string(cfg.enhance_scale));
  }
  return downsample(g.upscale(x, cfg.enhance_scale), cfg.enhance_scale);
}

PurifyResult purify_plus(const ImageTensor& x, const PurifyConfig& cfg, SuperResolver& g) {
  PurifyResult result = purify(x, cfg, g);
  if (cfg.enhance) result.image = enhance(result.image, cfg, g);
  return result;
}

}  // namespace superpure
