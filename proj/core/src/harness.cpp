#include "superpure/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "superpure/errors.hpp"
#include "superpure/parallel.hpp"
#include "superpure/png_io.hpp"

namespace superpure {
namespace {

// splitmix64 finalizer; decorrelates the patch stream from the background stream.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> parse_positions(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto values = parse_number_list(item);
    if (values.size() != 2) throw ConfigError("placement positions must be x,y pairs");
    out.emplace_back(static_cast<int>(values[0]), static_cast<int>(values[1]));
  }
  return out;
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(6);
  os << *v;
  return os.str();
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

struct Cell {
  double recall = 0.0;
  bool has_recall = false;
  double false_rate = 0.0;
  int iterations = 0;
};

SweepRow aggregate(double param, const std::vector<Cell>& cells) {
  SweepRow row;
  row.param = param;
  row.images = static_cast<int>(cells.size());
  double recall_sum = 0.0;
  int recall_n = 0;
  double false_sum = 0.0;
  double iter_sum = 0.0;
  for (const auto& c : cells) {
    if (c.has_recall) {
      recall_sum += c.recall;
      ++recall_n;
    }
    false_sum += c.false_rate;
    iter_sum += c.iterations;
  }
  if (recall_n > 0) row.mean_recall = recall_sum / recall_n;
  if (!cells.empty()) {
    row.mean_false_rate = false_sum / static_cast<double>(cells.size());
    row.mean_iterations = iter_sum / static_cast<double>(cells.size());
  }
  return row;
}

// Runs purify for every (param, image) cell; `configure` adapts workload/config per param.
template <typename Configure>
std::vector<SweepRow> run_sweep(const std::vector<double>& params, const Workload& w,
                                const PurifyConfig& cfg, const SuperResolver& g, int workers,
                                Configure configure) {
  if (params.empty()) return {};
  const std::size_t per_param = static_cast<std::size_t>(w.images);
  std::vector<Cell> cells(params.size() * per_param);
  std::vector<std::unique_ptr<SuperResolver>> handles(
      static_cast<std::size_t>(worker_count(workers)));

  parallel_for(cells.size(), workers, [&](std::size_t i, int worker) {
    auto& handle = handles[static_cast<std::size_t>(worker)];
    if (!handle) handle = g.clone();
    Workload wl = w;
    PurifyConfig pc = cfg;
    configure(params[i / per_param], wl, pc);
    const auto image = make_workload_image(wl, static_cast<int>(i % per_param));
    const auto result = purify_plus(image.attacked.image, pc, *handle);
    const auto metrics = eval_masking(image.attacked.truth, result.mask, result.trace);
    cells[i] = {metrics.patch_recall.value_or(0.0), metrics.patch_recall.has_value(),
                metrics.clean_false_rate, metrics.iterations};
  });

  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const auto first = cells.begin() + static_cast<std::ptrdiff_t>(p * per_param);
    rows.push_back(aggregate(params[p], std::vector<Cell>(first, first + static_cast<std::ptrdiff_t>(per_param))));
  }
  return rows;
}

}  // namespace

void Workload::validate() const {
  if (images < 1) throw ConfigError("workload needs at least one image");
  if (image_dir.empty()) {
    if (height < 1 || width < 1) throw ConfigError("workload image dimensions must be positive");
    if (channels != 1 && channels != 3) throw ConfigError("workload channels must be 1 or 3");
    patch.validate(height, width);
  }
}

Workload workload_from_config(const KeyValues& kv) {
  Workload w;
  w.background = parse_background(kv.get_string("background", "gradient"));
  w.height = static_cast<int>(kv.get_int("height", w.height));
  w.width = static_cast<int>(kv.get_int("width", w.width));
  w.channels = static_cast<int>(kv.get_int("channels", w.channels));
  w.images = static_cast<int>(kv.get_int("images", w.images));
  w.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  w.image_dir = kv.get_string("image_dir", "");

  PatchSpec& p = w.patch;
  p.kind = parse_patch_kind(kv.get_string("kind", "localized"));
  p.count = static_cast<int>(kv.get_int("count", p.kind == PatchKind::localized ? 1 : 8));
  if (kv.has("sizes")) {
    p.sizes.clear();
    for (double s : kv.get_doubles("sizes")) p.sizes.push_back(static_cast<int>(s));
  } else {
    p.sizes = {static_cast<int>(kv.get_int("size", p.kind == PatchKind::localized ? 64 : 16))};
  }
  p.amplitude = kv.get_double("amplitude", p.kind == PatchKind::localized ? 1.0 : 8.0 / 255.0);
  const auto placement = kv.get_string("placement", "random");
  if (placement != "random") p.fixed_positions = parse_positions(placement);

  if (const auto unused = kv.unused(); !unused.empty()) {
    throw ConfigError("unknown workload setting '" + unused.front() + "'");
  }
  w.validate();
  return w;
}

WorkloadImage make_workload_image(const Workload& w, int index) {
  WorkloadImage out{"", w.seed + static_cast<std::uint64_t>(index), ImageTensor(1, 1, 1),
                    {ImageTensor(1, 1, 1), PixelMask(1, 1)}};
  if (w.image_dir.empty()) {
    out.clean = make_background(w.background, w.height, w.width, w.channels, out.seed);
    out.label = std::string(to_string(w.background)) + "#" + std::to_string(out.seed);
  } else {
    const auto files = list_pngs(w.image_dir);
    if (files.empty()) throw IoError("no PNG images in " + w.image_dir.string());
    const auto& file = files[static_cast<std::size_t>(index) % files.size()];
    out.clean = load_png(file);
    out.label = file.filename().string();
  }
  PatchSpec spec = w.patch;
  spec.seed = mix(out.seed);
  out.attacked = inject(out.clean, spec);
  return out;
}

std::vector<EvalRow> evaluate(const Workload& w, const PurifyConfig& cfg, const SuperResolver& g,
                              int workers) {
  w.validate();
  std::vector<EvalRow> rows(static_cast<std::size_t>(w.images));
  std::vector<std::unique_ptr<SuperResolver>> handles(
      static_cast<std::size_t>(worker_count(workers)));
  parallel_for(rows.size(), workers, [&](std::size_t i, int worker) {
    auto& handle = handles[static_cast<std::size_t>(worker)];
    if (!handle) handle = g.clone();
    const auto start = std::chrono::steady_clock::now();
    const auto image = make_workload_image(w, static_cast<int>(i));
    const auto result = purify_plus(image.attacked.image, cfg, *handle);
    const auto stop = std::chrono::steady_clock::now();
    rows[i] = {image.label, w.patch.size_of(0), image.seed,
               eval_masking(image.attacked.truth, result.mask, result.trace),
               std::chrono::duration<double, std::milli>(stop - start).count()};
  });
  return rows;
}

std::vector<SweepRow> sweep_lambda(const Workload& w, const std::vector<double>& lambdas,
                                   const PurifyConfig& cfg, const SuperResolver& g, int workers) {
  w.validate();
  return run_sweep(lambdas, w, cfg, g, workers,
                   [](double lambda, Workload&, PurifyConfig& pc) { pc.lambda = lambda; });
}

std::vector<SweepRow> sweep_patch_size(const Workload& w, const std::vector<int>& sizes,
                                       const PurifyConfig& cfg, const SuperResolver& g,
                                       int workers) {
  std::vector<double> params(sizes.begin(), sizes.end());
  for (int s : sizes) {
    Workload probe = w;
    probe.patch.sizes = {s};
    probe.validate();
  }
  return run_sweep(params, w, cfg, g, workers, [](double size, Workload& wl, PurifyConfig&) {
    wl.patch.sizes = {static_cast<int>(size)};
  });
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "input,size,seed,recall,false_rate,iterations,ms\n";
  for (const auto& r : rows) {
    out << r.input << ',' << r.size << ',' << r.seed << ',' << format_optional(r.metrics.patch_recall)
        << ',' << format_optional(r.metrics.clean_false_rate) << ',' << r.metrics.iterations << ','
        << format_optional(r.ms) << '\n';
  }
}

nlohmann::json eval_to_json(const std::vector<EvalRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"input", r.input},
                   {"size", r.size},
                   {"seed", r.seed},
                   {"recall", optional_json(r.metrics.patch_recall)},
                   {"false_rate", r.metrics.clean_false_rate},
                   {"iterations", r.metrics.iterations},
                   {"ms", r.ms}});
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::string& param_name,
                     const std::vector<SweepRow>& rows) {
  out << param_name << ",recall,false_rate,iterations,images\n";
  for (const auto& r : rows) {
    out << format_optional(r.param) << ',' << format_optional(r.mean_recall) << ','
        << format_optional(r.mean_false_rate) << ',' << format_optional(r.mean_iterations) << ','
        << r.images << '\n';
  }
}

nlohmann::json sweep_to_json(const std::string& param_name, const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{param_name, r.param},
                   {"recall", optional_json(r.mean_recall)},
                   {"false_rate", r.mean_false_rate},
                   {"iterations", r.mean_iterations},
                   {"images", r.images}});
  }
  return out;
}

}  // namespace superpure
