#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "superpure/errors.hpp"
#include "superpure/harness.hpp"
#include "superpure/kv_config.hpp"
#include "superpure/neural_resolver.hpp"
#include "superpure/parallel.hpp"
#include "superpure/png_io.hpp"
#include "superpure/purifier.hpp"
#include "superpure/resolver.hpp"

namespace superpure::cli {
namespace {

namespace fs = std::filesystem;

// Every string-valued flag; the config-file key is the flag name with '_' for '-'.
struct FlagSet {
  std::map<std::string, std::string> values;
  std::vector<std::string> models;
  bool enhance = false;
  std::string config;

  void add(CLI::App* app, const std::string& name, const std::string& help) {
    app->add_option("--" + name, values[name], help);
  }
};

void add_purify_flags(CLI::App* app, FlagSet& f) {
  app->add_option("--config", f.config, "Flat key = value settings file; flags override it");
  f.add(app, "lambda", "Per-pixel L2 masking threshold (default 0.7)");
  f.add(app, "epsilon", "Stop threshold on newly masked pixels (default 4)");
  f.add(app, "epsilon-mode", "count | fraction (default count)");
  f.add(app, "max-iters", "Maximum masking iterations (default 30)");
  f.add(app, "scale", "Masking rescale factor, 2 or 4 (default 4)");
  f.add(app, "enhance-scale", "Enhancement rescale factor, 2 or 4 (default 2)");
  app->add_flag("--enhance", f.enhance, "Run the enhancement pass after masking");
  f.add(app, "ordering", "down_up | up_down (default down_up)");
  f.add(app, "backend", "classical | neural (default classical)");
  app->add_option("--model", f.models, "ONNX model with JSON sidecar; repeat for x2 and x4");
  f.add(app, "tile", "Neural backend tile size in pixels (default 256)");
  f.add(app, "overlap", "Neural backend tile overlap in pixels (default 16)");
  f.add(app, "workers", "Worker threads (default: hardware concurrency)");
}

// Merges the config file and the flags that were actually given.
KeyValues collect(const CLI::App& app, const FlagSet& f) {
  KeyValues kv = f.config.empty() ? KeyValues{} : KeyValues::load(f.config);
  for (const auto& [name, value] : f.values) {
    if (app.count("--" + name) > 0) kv.set(name, value);
  }
  if (!f.models.empty()) {
    std::string joined;
    for (const auto& m : f.models) joined += (joined.empty() ? "" : ",") + m;
    kv.set("model", joined);
  }
  if (f.enhance) kv.set("enhance", "true");
  return kv;
}

PurifyConfig purify_config(const KeyValues& kv) {
  PurifyConfig cfg;
  cfg.lambda = kv.get_double("lambda", cfg.lambda);
  cfg.epsilon = kv.get_double("epsilon", cfg.epsilon);
  cfg.epsilon_mode = parse_epsilon_mode(kv.get_string("epsilon_mode", "count"));
  cfg.max_iters = static_cast<int>(kv.get_int("max_iters", cfg.max_iters));
  cfg.mask_scale = static_cast<int>(kv.get_int("scale", cfg.mask_scale));
  cfg.enhance_scale = static_cast<int>(kv.get_int("enhance_scale", cfg.enhance_scale));
  cfg.enhance = kv.get_bool("enhance", cfg.enhance);
  cfg.ordering = parse_ordering(kv.get_string("ordering", "down_up"));
  return cfg;
}

struct BackendSettings {
  std::string backend;
  int tile = kDefaultTile;
  int overlap = kDefaultOverlap;
  std::string models;
};

BackendSettings backend_settings(const KeyValues& kv) {
  return {kv.get_string("backend", "classical"), static_cast<int>(kv.get_int("tile", kDefaultTile)),
          static_cast<int>(kv.get_int("overlap", kDefaultOverlap)), kv.get_string("model", "")};
}

std::unique_ptr<SuperResolver> make_backend(const BackendSettings& b) {
  if (b.backend == "classical") return std::make_unique<ClassicalResolver>();
  if (b.backend != "neural") throw ConfigError("backend must be classical or neural, got " + b.backend);
  if (b.overlap < 0 || b.tile <= 2 * b.overlap) throw ConfigError("tile must exceed twice the overlap");

  std::vector<fs::path> paths;
  std::stringstream ss(b.models);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) paths.emplace_back(item);
  }
  if (paths.empty()) throw ConfigError("--backend neural needs at least one --model");
  return std::make_unique<TiledResolver>(
      std::make_unique<NeuralResolver>(NeuralResolver::from_paths(paths)), b.tile, b.overlap);
}

void reject_unused(const KeyValues& kv) {
  if (const auto unused = kv.unused(); !unused.empty()) {
    throw ConfigError("unknown setting '" + unused.front() + "'");
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kConfigInvalid;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kIoError;
  if (dynamic_cast<const BackendError*>(&e) != nullptr) return kBackendError;
  if (dynamic_cast<const DimensionError*>(&e) != nullptr) return kConfigInvalid;
  return kFailure;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

// Writes `text` to `path`, or to `out` when the path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path);
  file << text;
  if (!file) throw IoError("cannot write " + path);
}

std::string report_format(const KeyValues& kv) {
  const auto fmt = kv.get_string("report", "csv");
  if (fmt != "csv" && fmt != "json") throw ConfigError("report format must be csv or json");
  return fmt;
}

struct ImageRun {
  std::string input;
  std::string output;
  std::optional<IterationTrace> trace;
  std::size_t masked = 0;
  double ms = 0.0;
  std::string error;
  int code = kOk;
};

std::string run_report(const std::vector<ImageRun>& runs, const std::string& format) {
  std::vector<double> latencies;
  for (const auto& r : runs) {
    if (r.code == kOk) latencies.push_back(r.ms);
  }
  std::sort(latencies.begin(), latencies.end());
  double mean = 0.0;
  for (double v : latencies) mean += v;
  if (!latencies.empty()) mean /= static_cast<double>(latencies.size());
  double median = 0.0;
  if (!latencies.empty()) {
    const auto n = latencies.size();
    median = n % 2 == 1 ? latencies[n / 2] : 0.5 * (latencies[n / 2 - 1] + latencies[n / 2]);
  }
  const auto failures = static_cast<std::size_t>(
      std::count_if(runs.begin(), runs.end(), [](const ImageRun& r) { return r.code != kOk; }));

  if (format == "json") {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& r : runs) {
      nlohmann::json row{{"input", r.input}, {"output", r.output}, {"ms", r.ms}};
      if (r.trace) {
        row["iterations"] = r.trace->total_iterations();
        row["masked"] = r.masked;
        row["stop_reason"] = std::string(to_string(r.trace->stop_reason));
      } else {
        row["error"] = r.error;
      }
      images.push_back(std::move(row));
    }
    nlohmann::json j{{"images", std::move(images)},
                     {"aggregate",
                      {{"count", runs.size()},
                       {"successes", runs.size() - failures},
                       {"failures", failures},
                       {"mean_ms", mean},
                       {"median_ms", median}}}};
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "input,output,iterations,masked,stop_reason,ms,status\n";
  for (const auto& r : runs) {
    os << r.input << ',' << r.output << ',';
    if (r.trace) {
      os << r.trace->total_iterations() << ',' << r.masked << ',' << to_string(r.trace->stop_reason);
    } else {
      os << ",,";
    }
    os << ',' << r.ms << ',' << (r.code == kOk ? "ok" : "failed") << '\n';
  }
  return os.str();
}

int cmd_purify(const KeyValues& kv, std::ostream& out, std::ostream& err) {
  const auto in = kv.get_string("in", "");
  const auto out_path = kv.get_string("out", "");
  const auto mask_out = kv.get_string("mask_out", "");
  const auto trace_out = kv.get_string("trace", "");
  const auto report_out = kv.get_string("report_out", "");
  const bool want_report = kv.has("report");
  const auto format = report_format(kv);
  const int workers = static_cast<int>(kv.get_int("workers", 0));
  const PurifyConfig cfg = purify_config(kv);
  const auto backend_cfg = backend_settings(kv);
  reject_unused(kv);
  if (in.empty() || out_path.empty()) throw ConfigError("purify needs --in and --out");
  auto backend = make_backend(backend_cfg);

  struct Job {
    fs::path input, output, mask, trace;
  };
  std::vector<Job> jobs;
  if (fs::is_directory(in)) {
    fs::create_directories(out_path);
    if (!mask_out.empty()) fs::create_directories(mask_out);
    if (!trace_out.empty()) fs::create_directories(trace_out);
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(in)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());
    for (const auto& p : inputs) {
      const auto stem = p.stem().string();
      jobs.push_back({p, fs::path(out_path) / p.filename(),
                      mask_out.empty() ? fs::path() : fs::path(mask_out) / (stem + "_mask.png"),
                      trace_out.empty() ? fs::path() : fs::path(trace_out) / (stem + ".json")});
    }
  } else {
    if (!fs::exists(in)) throw IoError("input not found: " + in);
    jobs.push_back({in, out_path, mask_out, trace_out});
  }

  std::vector<ImageRun> runs(jobs.size());
  std::vector<std::unique_ptr<SuperResolver>> handles(static_cast<std::size_t>(worker_count(workers)));
  parallel_for(jobs.size(), workers, [&](std::size_t i, int worker) {
    auto& handle = handles[static_cast<std::size_t>(worker)];
    const auto& job = jobs[i];
    auto& run = runs[i];
    run.input = job.input.string();
    run.output = job.output.string();
    const auto start = std::chrono::steady_clock::now();
    try {
      if (!handle) handle = backend->clone();
      const ImageTensor img = load_png(job.input);
      auto result = purify_plus(img, cfg, *handle);
      save_png(job.output, result.image);
      if (!job.mask.empty()) save_mask_png(job.mask, result.mask);
      if (!job.trace.empty()) write_json(job.trace, to_json(result.trace));
      run.masked = result.mask.popcount();
      run.trace = std::move(result.trace);
    } catch (const std::exception& e) {
      run.error = e.what();
      run.code = exit_code_for(e);
    }
    run.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  });

  int code = kOk;
  for (const auto& r : runs) {
    if (r.code != kOk) {
      err << "superpure: " << r.input << ": " << r.error << '\n';
      if (code == kOk) code = r.code;
    }
  }
  if (want_report) emit(report_out, run_report(runs, format), out);
  return code;
}

Workload load_workload(const KeyValues& kv) {
  const auto path = kv.get_string("workload", "");
  if (path.empty()) throw ConfigError("--workload is required");
  if (!fs::is_regular_file(path)) throw ConfigError("workload file not found: " + path);
  Workload w = workload_from_config(KeyValues::load(path));
  if (kv.has("seed")) w.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  return w;
}

int cmd_evaluate(const KeyValues& kv, std::ostream& out) {
  const Workload w = load_workload(kv);
  const PurifyConfig cfg = purify_config(kv);
  const auto format = report_format(kv);
  const auto dest = kv.get_string("out", "");
  const int workers = static_cast<int>(kv.get_int("workers", 0));
  const auto backend_cfg = backend_settings(kv);
  reject_unused(kv);
  cfg.validate(w.channels);
  auto backend = make_backend(backend_cfg);
  const auto rows = evaluate(w, cfg, *backend, workers);
  if (format == "json") {
    emit(dest, eval_to_json(rows).dump(2) + "\n", out);
  } else {
    std::ostringstream os;
    write_eval_csv(os, rows);
    emit(dest, os.str(), out);
  }
  return kOk;
}

int cmd_sweep(const KeyValues& kv, std::ostream& out) {
  const Workload w = load_workload(kv);
  const PurifyConfig cfg = purify_config(kv);
  const auto format = report_format(kv);
  const auto dest = kv.get_string("out", "");
  const int workers = static_cast<int>(kv.get_int("workers", 0));
  const auto param = kv.get_string("param", "lambda");
  std::vector<double> values;
  if (kv.has("values")) {
    values = kv.get_doubles("values");
  } else if (param == "lambda") {
    values = {0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95};
  } else {
    values = {0, 16, 32, 48, 64, 96};
  }
  const auto backend_cfg = backend_settings(kv);
  reject_unused(kv);
  auto backend = make_backend(backend_cfg);

  std::vector<SweepRow> rows;
  if (param == "lambda") {
    for (double l : values) {
      PurifyConfig probe = cfg;
      probe.lambda = l;
      probe.validate(w.channels);
    }
    rows = sweep_lambda(w, values, cfg, *backend, workers);
  } else if (param == "size") {
    std::vector<int> sizes;
    for (double v : values) {
      if (v < 0 || v != static_cast<int>(v)) throw ConfigError("patch sizes must be whole numbers");
      sizes.push_back(static_cast<int>(v));
    }
    cfg.validate(w.channels);
    rows = sweep_patch_size(w, sizes, cfg, *backend, workers);
  } else {
    throw ConfigError("--param must be lambda or size");
  }

  if (format == "json") {
    emit(dest, sweep_to_json(param, rows).dump(2) + "\n", out);
  } else {
    std::ostringstream os;
    write_sweep_csv(os, param, rows);
    emit(dest, os.str(), out);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"superpure: iterative down-up masking purification of adversarial patches"};
  app.require_subcommand(1);

  FlagSet purify_flags;
  auto* purify = app.add_subcommand("purify", "Purify one PNG or a directory of PNGs");
  add_purify_flags(purify, purify_flags);
  purify_flags.add(purify, "in", "Input PNG or directory");
  purify_flags.add(purify, "out", "Output PNG or directory");
  purify_flags.add(purify, "mask-out", "Cumulative mask PNG (directory for directory runs)");
  purify_flags.add(purify, "trace", "Iteration trace JSON (directory for directory runs)");
  purify_flags.add(purify, "report", "Write a run report: csv | json");
  purify_flags.add(purify, "report-out", "Run report path (default stdout)");

  FlagSet eval_flags;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Inject synthetic patches, purify, score masks");
  add_purify_flags(evaluate_cmd, eval_flags);
  eval_flags.add(evaluate_cmd, "workload", "Workload settings file");
  eval_flags.add(evaluate_cmd, "seed", "Override the workload's base seed");
  eval_flags.add(evaluate_cmd, "report", "csv | json (default csv)");
  eval_flags.add(evaluate_cmd, "out", "Report path (default stdout)");

  FlagSet sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Sweep lambda or patch size over a workload");
  add_purify_flags(sweep, sweep_flags);
  sweep_flags.add(sweep, "workload", "Workload settings file");
  sweep_flags.add(sweep, "seed", "Override the workload's base seed");
  sweep_flags.add(sweep, "param", "lambda | size (default lambda)");
  sweep_flags.add(sweep, "values", "Comma-separated grid; empty string for an empty grid");
  sweep_flags.add(sweep, "report", "csv | json (default csv)");
  sweep_flags.add(sweep, "out", "Table path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "superpure: " << e.what() << '\n';
    return kConfigInvalid;
  }

  try {
    if (purify->parsed()) return cmd_purify(collect(*purify, purify_flags), out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(collect(*evaluate_cmd, eval_flags), out);
    return cmd_sweep(collect(*sweep, sweep_flags), out);
  } catch (const std::exception& e) {
    err << "superpure: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace superpure::cli
