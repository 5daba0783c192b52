#include <doctest.h>

#include <random>
#include <sstream>

#include "superpure/errors.hpp"
#include "superpure/harness.hpp"
#include "superpure/patchlab.hpp"
#include "superpure/png_io.hpp"
#include "test_support.hpp"

using namespace superpure;
using superpure::testing::constant_image;
using superpure::testing::random_image;

namespace {

PatchSpec localized(int size, std::uint64_t seed, double amplitude = 1.0) {
  PatchSpec spec;
  spec.sizes = {size};
  spec.seed = seed;
  spec.amplitude = amplitude;
  return spec;
}

PatchSpec distributed(int count, int size, std::uint64_t seed, double amplitude = 8.0 / 255.0) {
  PatchSpec spec;
  spec.kind = PatchKind::distributed;
  spec.count = count;
  spec.sizes = {size};
  spec.seed = seed;
  spec.amplitude = amplitude;
  return spec;
}

}  // namespace

TEST_SUITE("patchlab") {

TEST_CASE("inject geometry") {
  const auto clean = make_background(Background::gradient, 224, 224, 3, 1);
  SUBCASE("zero amplitude changes nothing but still marks the region") {
    const auto r = inject(clean, localized(32, 3, 0.0));
    CHECK(r.image == clean);
    CHECK(r.truth.popcount() == 32 * 32);
  }
  SUBCASE("localized 64x64") {
    CHECK(inject(clean, localized(64, 9)).truth.popcount() == 4096);
  }
  SUBCASE("distributed 8 x 16x16 regions are disjoint") {
    const auto r = inject(clean, distributed(8, 16, 7));
    CHECK(r.truth.popcount() == 2048);
  }
  SUBCASE("fixed placement") {
    PatchSpec spec = localized(10, 1);
    spec.fixed_positions = {{5, 7}};
    const auto r = inject(clean, spec);
    CHECK(r.truth.test(7, 5));
    CHECK(r.truth.test(16, 14));
    CHECK_FALSE(r.truth.test(17, 14));
    CHECK_FALSE(r.truth.test(7, 4));
  }
  SUBCASE("size 0 is a clean image") {
    const auto r = inject(clean, localized(0, 1));
    CHECK(r.image == clean);
    CHECK(r.truth.popcount() == 0);
  }
}

TEST_CASE("inject only touches ground-truth pixels and is seed-stable") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const auto clean = random_image(64, 80, 3, rng());
    const auto spec = trial % 2 == 0 ? localized(1 + static_cast<int>(rng() % 40), rng())
                                     : distributed(2 + static_cast<int>(rng() % 6), 8, rng(), 0.5);
    const auto r = inject(clean, spec);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 80; ++x) {
        if (r.truth.test(y, x)) continue;
        for (int c = 0; c < 3; ++c) REQUIRE(r.image.at(y, x, c) == clean.at(y, x, c));
      }
    }
    const auto again = inject(clean, spec);
    CHECK(again.image == r.image);
    CHECK(again.truth == r.truth);
  }
}

TEST_CASE("patch spec validation") {
  const auto clean = constant_image(32, 32, 3, 0.5f);
  PatchSpec spec = localized(40, 1);
  CHECK_THROWS_AS(inject(clean, spec), ConfigError);
  spec = localized(8, 1);
  spec.fixed_positions = {{28, 0}};
  CHECK_THROWS_AS(inject(clean, spec), ConfigError);
  spec = localized(8, 1);
  spec.count = 2;
  CHECK_THROWS_AS(inject(clean, spec), ConfigError);
  CHECK_THROWS_AS(inject(clean, distributed(1, 4, 1)), ConfigError);
  spec = distributed(2, 8, 1);
  spec.fixed_positions = {{0, 0}, {4, 4}};
  CHECK_THROWS_AS(inject(clean, spec), ConfigError);
  spec = localized(8, 1, 1.5);
  CHECK_THROWS_AS(inject(clean, spec), ConfigError);
  CHECK_THROWS_AS(inject(clean, distributed(17, 8, 1)), ConfigError);
}

TEST_CASE("backgrounds are seeded and in range") {
  for (auto kind : {Background::gradient, Background::smooth_noise}) {
    const auto a = make_background(kind, 50, 70, 3, 4);
    CHECK(a == make_background(kind, 50, 70, 3, 4));
    CHECK_FALSE(a == make_background(kind, 50, 70, 3, 5));
    for (float v : a.data()) {
      REQUIRE(v >= 0.1f - 1e-6f);
      REQUIRE(v <= 0.9f + 1e-6f);
    }
  }
  CHECK(parse_background("smooth_noise") == Background::smooth_noise);
  CHECK_THROWS_AS(parse_background("plaid"), ConfigError);
}

TEST_CASE("eval_masking") {
  PixelMask truth(224, 224);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) truth.set(y + 10, x + 20);
  }
  const IterationTrace trace{{{1, 5, 5, 0.0}, {2, 0, 5, 0.0}}, StopReason::converged};

  auto m = eval_masking(truth, truth, trace);
  CHECK(*m.patch_recall == 1.0);
  CHECK(m.clean_false_rate == 0.0);
  CHECK(m.iterations == 2);

  m = eval_masking(truth, PixelMask(224, 224), trace);
  CHECK(*m.patch_recall == 0.0);
  CHECK(m.clean_false_rate == 0.0);

  PixelMask cum(224, 224);
  int covered = 0;
  for (int y = 0; y < 224 && covered < 3400; ++y) {
    for (int x = 0; x < 224 && covered < 3400; ++x) {
      if (truth.test(y, x)) {
        cum.set(y, x);
        ++covered;
      }
    }
  }
  int clean = 0;
  for (int y = 200; y < 224 && clean < 500; ++y) {
    for (int x = 0; x < 224 && clean < 500; ++x) {
      cum.set(y, x);
      ++clean;
    }
  }
  m = eval_masking(truth, cum, trace);
  CHECK(*m.patch_recall == doctest::Approx(0.8301).epsilon(1e-4));
  CHECK(m.clean_false_rate == doctest::Approx(0.01085).epsilon(1e-3));

  m = eval_masking(PixelMask(8, 8), PixelMask(8, 8), trace);
  CHECK_FALSE(m.patch_recall.has_value());
  CHECK_THROWS_AS(eval_masking(truth, PixelMask(8, 8), trace), DimensionError);
}

TEST_CASE("eval_masking agrees with set arithmetic") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    PixelMask truth(20, 30);
    PixelMask cum(20, 30);
    for (int i = 0; i < 150; ++i) truth.set(static_cast<int>(rng() % 20), static_cast<int>(rng() % 30));
    for (int i = 0; i < 150; ++i) cum.set(static_cast<int>(rng() % 20), static_cast<int>(rng() % 30));
    const auto m = eval_masking(truth, cum, IterationTrace{});
    const auto hits = (truth & cum).popcount();
    PixelMask false_masked = cum;
    false_masked.subtract(truth);
    CHECK(*m.patch_recall == static_cast<double>(hits) / truth.popcount());
    CHECK(m.clean_false_rate ==
          static_cast<double>(false_masked.popcount()) / truth.complement().popcount());
  }
}

TEST_CASE("recon_error_stats") {
  SUBCASE("perfect reconstruction") {
    const auto img = random_image(8, 8, 3, 2);
    PixelMask truth(8, 8);
    truth.set(1, 1);
    const auto s = recon_error_stats(img, img, truth);
    CHECK(s.mse_patch == 0.0);
    CHECK(s.mse_clean == 0.0);
    CHECK_FALSE(s.ratio.has_value());
  }
  SUBCASE("hand-built 2x2") {
    const ImageTensor original(2, 2, 1, std::vector<float>{0.5f, 0.5f, 0.5f, 0.5f});
    const ImageTensor rec(2, 2, 1, std::vector<float>{0.7f, 0.6f, 0.5f, 0.5f});
    PixelMask truth(2, 2);
    truth.set(0, 0);
    const auto s = recon_error_stats(original, rec, truth);
    CHECK(s.mse_patch == doctest::Approx(0.04).epsilon(1e-5));
    CHECK(s.mse_clean == doctest::Approx(0.0033333).epsilon(1e-4));
    CHECK(*s.ratio == doctest::Approx(12.0).epsilon(1e-4));
  }
  SUBCASE("one down-up round separates a noise patch") {
    ClassicalResolver g;
    const auto clean = make_background(Background::gradient, 224, 224, 3, 3);
    const auto adv = inject(clean, localized(64, 12));
    const auto s = recon_error_stats(adv.image, reconstruct(adv.image, 4, Ordering::down_up, g), adv.truth);
    CHECK(*s.ratio > 2.0);
  }
  CHECK_THROWS_AS(recon_error_stats(ImageTensor(2, 2, 1), ImageTensor(2, 2, 1), PixelMask(3, 2)),
                  DimensionError);
}

}

TEST_SUITE("harness") {

TEST_CASE("workload settings") {
  std::istringstream in(R"(
    # synthetic workload
    background = smooth_noise
    height = 96
    width = 128
    images = 3
    seed = 40
    kind = distributed
    count = 4
    size = 12
    amplitude = 0.25
  )");
  const auto w = workload_from_config(KeyValues::parse(in));
  CHECK(w.background == Background::smooth_noise);
  CHECK(w.height == 96);
  CHECK(w.width == 128);
  CHECK(w.images == 3);
  CHECK(w.seed == 40);
  CHECK(w.patch.kind == PatchKind::distributed);
  CHECK(w.patch.count == 4);
  CHECK(w.patch.sizes == std::vector<int>{12});
  CHECK(w.patch.amplitude == 0.25);

  std::istringstream defaults("kind = distributed\n");
  const auto d = workload_from_config(KeyValues::parse(defaults));
  CHECK(d.patch.count == 8);
  CHECK(d.patch.sizes == std::vector<int>{16});
  CHECK(d.patch.amplitude == doctest::Approx(8.0 / 255.0));

  std::istringstream fixed("size = 8\nplacement = 3,4\n");
  CHECK(workload_from_config(KeyValues::parse(fixed)).patch.fixed_positions ==
        std::vector<std::pair<int, int>>{{3, 4}});

  std::istringstream unknown("colour = red\n");
  CHECK_THROWS_AS(workload_from_config(KeyValues::parse(unknown)), ConfigError);
  std::istringstream bad("images = many\n");
  CHECK_THROWS_AS(workload_from_config(KeyValues::parse(bad)), ConfigError);
}

TEST_CASE("workload images are reproducible per index") {
  Workload w;
  w.images = 3;
  w.seed = 10;
  const auto a = make_workload_image(w, 2);
  const auto b = make_workload_image(w, 2);
  CHECK(a.seed == 12);
  CHECK(a.attacked.image == b.attacked.image);
  CHECK(a.attacked.truth.popcount() == 4096);
  CHECK_FALSE(make_workload_image(w, 1).attacked.image == a.attacked.image);
}

TEST_CASE("workload from an image directory") {
  superpure::testing::TempDir dir("images");
  save_png(dir / "b.png", make_background(Background::gradient, 40, 48, 3, 1));
  save_png(dir / "a.png", make_background(Background::gradient, 40, 48, 3, 2));
  Workload w;
  w.image_dir = dir.path();
  w.images = 3;
  w.patch.sizes = {8};
  CHECK(make_workload_image(w, 0).label == "a.png");
  CHECK(make_workload_image(w, 1).label == "b.png");
  CHECK(make_workload_image(w, 2).label == "a.png");
  CHECK(make_workload_image(w, 0).clean == load_png(dir / "a.png"));

  Workload empty;
  superpure::testing::TempDir none("noimages");
  empty.image_dir = none.path();
  CHECK_THROWS_AS(make_workload_image(empty, 0), IoError);
}

TEST_CASE("evaluate matches direct library calls and is schedule-independent") {
  ClassicalResolver g;
  Workload w;
  w.images = 1;
  w.seed = 3;
  const PurifyConfig cfg;
  const auto rows = evaluate(w, cfg, g);
  REQUIRE(rows.size() == 1);
  const auto image = make_workload_image(w, 0);
  const auto r = purify(image.attacked.image, cfg, g);
  const auto m = eval_masking(image.attacked.truth, r.mask, r.trace);
  CHECK(rows[0].metrics.patch_recall == m.patch_recall);
  CHECK(rows[0].metrics.clean_false_rate == m.clean_false_rate);
  CHECK(rows[0].metrics.iterations == m.iterations);
  CHECK(rows[0].size == 64);
  CHECK(rows[0].seed == 3);
  CHECK(rows[0].ms > 0.0);

  w.images = 6;
  const auto serial = evaluate(w, cfg, g, 1);
  const auto parallel = evaluate(w, cfg, g, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].input == parallel[i].input);
    CHECK(serial[i].metrics.patch_recall == parallel[i].metrics.patch_recall);
    CHECK(serial[i].metrics.iterations == parallel[i].metrics.iterations);
  }
}

TEST_CASE("sweeps") {
  ClassicalResolver g;
  Workload w;
  w.images = 1;
  const PurifyConfig cfg;

  SUBCASE("single lambda, single image equals a direct call") {
    const auto rows = sweep_lambda(w, {0.7}, cfg, g);
    REQUIRE(rows.size() == 1);
    const auto image = make_workload_image(w, 0);
    const auto r = purify(image.attacked.image, cfg, g);
    const auto m = eval_masking(image.attacked.truth, r.mask, r.trace);
    CHECK(rows[0].param == 0.7);
    CHECK(rows[0].mean_recall == m.patch_recall);
    CHECK(rows[0].mean_iterations == m.iterations);
    CHECK(rows[0].images == 1);
  }
  SUBCASE("lambda near sqrt(C) masks almost nothing") {
    w.images = 3;
    const auto rows = sweep_lambda(w, {0.99 * std::sqrt(3.0)}, cfg, g);
    CHECK(*rows[0].mean_recall <= 0.01);
    CHECK(rows[0].mean_iterations >= 1.0);
    CHECK(rows[0].mean_iterations <= 2.0);
  }
  SUBCASE("size 0 converges immediately") {
    w.images = 4;
    const auto rows = sweep_patch_size(w, {0}, cfg, g);
    CHECK_FALSE(rows[0].mean_recall.has_value());
    CHECK(rows[0].mean_iterations <= 4.0);
  }
  SUBCASE("empty grids") {
    CHECK(sweep_patch_size(w, {}, cfg, g).empty());
    CHECK(sweep_lambda(w, {}, cfg, g).empty());
  }
  SUBCASE("sweeps are deterministic across worker counts") {
    w.images = 3;
    const auto a = sweep_patch_size(w, {16, 32}, cfg, g, 1);
    const auto b = sweep_patch_size(w, {16, 32}, cfg, g, 3);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].mean_recall == b[i].mean_recall);
      CHECK(a[i].mean_false_rate == b[i].mean_false_rate);
      CHECK(a[i].mean_iterations == b[i].mean_iterations);
    }
  }
}

TEST_CASE("report formats") {
  std::vector<EvalRow> rows(1);
  rows[0].input = "gradient#4";
  rows[0].size = 64;
  rows[0].seed = 4;
  rows[0].metrics.patch_recall = 0.875;
  rows[0].metrics.clean_false_rate = 0.0;
  rows[0].metrics.iterations = 7;
  rows[0].ms = 12.5;
  std::ostringstream csv;
  write_eval_csv(csv, rows);
  CHECK(csv.str() == "input,size,seed,recall,false_rate,iterations,ms\ngradient#4,64,4,0.875,0,7,12.5\n");
  const auto j = eval_to_json(rows);
  CHECK(j[0].at("recall") == 0.875);
  CHECK(j[0].at("iterations") == 7);

  std::vector<SweepRow> sweep(1);
  sweep[0].param = 0;
  sweep[0].mean_iterations = 1;
  sweep[0].images = 2;
  std::ostringstream table;
  write_sweep_csv(table, "size", sweep);
  CHECK(table.str() == "size,recall,false_rate,iterations,images\n0,,0,1,2\n");
  CHECK(sweep_to_json("size", sweep)[0].at("recall").is_null());
}

}
