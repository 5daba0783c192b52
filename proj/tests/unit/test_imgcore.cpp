#include <doctest.h>

#include <cmath>
#include <random>

#include "superpure/errors.hpp"
#include "superpure/pixel_ops.hpp"
#include "superpure/png_io.hpp"
#include "test_support.hpp"

using namespace superpure;
using superpure::testing::constant_image;
using superpure::testing::random_image;

TEST_SUITE("imgcore") {

TEST_CASE("image tensor rejects out-of-range values and bad shapes") {
  CHECK_THROWS_AS(ImageTensor(2, 2, 1, std::vector<float>{0.f, 0.5f, 1.f, 1.5f}), ConfigError);
  CHECK_THROWS_AS(ImageTensor(2, 2, 1, std::vector<float>{0.f, NAN, 1.f, 1.f}), ConfigError);
  CHECK_THROWS_AS(ImageTensor(2, 2, 1, std::vector<float>{0.f}), DimensionError);
  CHECK_THROWS_AS(ImageTensor(0, 2, 1), DimensionError);
  CHECK_THROWS_AS(ImageTensor(2, 2, 2), DimensionError);

  const auto img = ImageTensor::clamped(1, 3, 1, {-0.5f, 0.25f, 7.0f});
  CHECK(img.at(0, 0, 0) == 0.0f);
  CHECK(img.at(0, 1, 0) == 0.25f);
  CHECK(img.at(0, 2, 0) == 1.0f);
}

TEST_CASE("downsample averages windows") {
  SUBCASE("constant image") {
    const auto out = downsample(constant_image(16, 12, 3, 0.5f), 4);
    CHECK(out.height() == 4);
    CHECK(out.width() == 3);
    for (float v : out.data()) CHECK(v == 0.5f);
  }
  SUBCASE("checkerboard to a single pixel") {
    std::vector<float> data(16);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) data[y * 4 + x] = static_cast<float>((x + y) % 2);
    }
    const auto out = downsample(ImageTensor(4, 4, 1, data), 4);
    CHECK(out.height() == 1);
    CHECK(out.width() == 1);
    CHECK(out.at(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-7));
  }
  SUBCASE("shape contract") {
    const auto out = downsample(constant_image(224, 224, 3, 0.2f), 4);
    CHECK(out.height() == 56);
    CHECK(out.width() == 56);
    CHECK(out.channels() == 3);
  }
  SUBCASE("matches brute-force window means") {
    const auto img = random_image(24, 32, 3, 11);
    const auto out = downsample(img, 4);
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          CHECK(out.at(y, x, c) ==
                doctest::Approx(superpure::testing::window_mean(img, y, x, c, 4)).epsilon(1e-6));
        }
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(downsample(constant_image(8, 8, 1, 0.1f), 1), ConfigError);
    CHECK_THROWS_AS(downsample(constant_image(8, 3, 1, 0.1f), 4), ConfigError);
  }
}

TEST_CASE("downsample reflect-pads non-divisible dimensions") {
  // 5 columns, s = 2: the padded sixth column mirrors column 3.
  std::vector<float> row{0.0f, 0.2f, 0.4f, 0.6f, 0.8f};
  std::vector<float> data;
  for (int y = 0; y < 2; ++y) data.insert(data.end(), row.begin(), row.end());
  const auto out = downsample(ImageTensor(2, 5, 1, data), 2);
  REQUIRE(out.width() == 3);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.1));
  CHECK(out.at(0, 1, 0) == doctest::Approx(0.5));
  CHECK(out.at(0, 2, 0) == doctest::Approx(0.7));  // (0.8 + 0.6) / 2
}

TEST_CASE("downsample is linear") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> half(0.0f, 0.5f);
  for (int trial = 0; trial < 20; ++trial) {
    const int s = trial % 2 == 0 ? 2 : 4;
    const int h = s * (1 + trial % 5);
    const int w = s * (2 + trial % 3);
    std::vector<float> a(static_cast<std::size_t>(h) * w * 3), b(a.size()), sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = half(rng);
      b[i] = half(rng);
      sum[i] = a[i] + b[i];
    }
    const auto da = downsample(ImageTensor(h, w, 3, a), s);
    const auto db = downsample(ImageTensor(h, w, 3, b), s);
    const auto dsum = downsample(ImageTensor(h, w, 3, sum), s);
    for (std::size_t i = 0; i < dsum.data().size(); ++i) {
      CHECK(std::abs(dsum.data()[i] - (da.data()[i] + db.data()[i])) <= 1e-6);
    }
  }
}

TEST_CASE("perturbation energy") {
  CHECK(perturbation_energy(Perturbation::raw(4, 4, 1, std::vector<float>(16, 0.0f))) == 0.0);
  CHECK(perturbation_energy(Perturbation::raw(4, 4, 1, std::vector<float>(16, 0.5f))) ==
        doctest::Approx(4.0));

  SUBCASE("constant delta on an aligned region drops by s^2 exactly") {
    for (int s : {2, 4}) {
      std::vector<float> delta(16 * 16 * 3, 0.0f);
      for (int y = 4; y < 12; ++y) {
        for (int x = 0; x < 8; ++x) {
          for (int c = 0; c < 3; ++c) delta[(y * 16 + x) * 3 + c] = -0.375f;
        }
      }
      const auto p = Perturbation::raw(16, 16, 3, delta);
      CHECK(perturbation_energy(downsample(p, s)) == perturbation_energy(p) / (s * s));
    }
  }
}

TEST_CASE("perturbation construction clips onto the image") {
  const auto clean = constant_image(2, 2, 1, 0.9f);
  PixelMask support(2, 2);
  support.set(0, 0);
  const auto p = Perturbation::clipped(clean, std::vector<float>{0.5f, 0.5f, -0.1f, 0.f}, support);
  CHECK(p.delta()[0] == doctest::Approx(0.1f));
  CHECK(p.delta()[1] == 0.0f);
  CHECK(p.delta()[2] == 0.0f);
  CHECK(p.support().popcount() == 1);
}

TEST_CASE("distance map") {
  SUBCASE("identical images") {
    const auto img = random_image(5, 7, 3, 3);
    const auto d = distance_map(img, img);
    for (float v : d.values()) CHECK(v == 0.0f);
  }
  SUBCASE("hand-computed pixels") {
    ImageTensor a(1, 2, 3, 0.0f);
    ImageTensor b(1, 2, 3, 0.0f);
    b.set(0, 0, 0, 1.0f);
    a.set(0, 1, 0, 1.0f);
    a.set(0, 1, 1, 1.0f);
    a.set(0, 1, 2, 1.0f);
    const auto d = distance_map(a, b);
    CHECK(d.at(0, 0) == doctest::Approx(1.0));
    CHECK(d.at(0, 1) == doctest::Approx(1.7320508));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(distance_map(ImageTensor(2, 2, 3), ImageTensor(2, 3, 3)), DimensionError);
    CHECK_THROWS_AS(distance_map(ImageTensor(2, 2, 3), ImageTensor(2, 2, 1)), DimensionError);
  }
}

TEST_CASE("threshold_mask counts only new pixels") {
  std::vector<float> values(10 * 10, 0.1f);
  const int hot[7] = {0, 11, 23, 45, 67, 88, 99};
  for (int i : hot) values[static_cast<std::size_t>(i)] = 0.9f;
  const DistanceMap d(10, 10, 3, values);
  PixelMask prior(10, 10);

  auto r = threshold_mask(d, 0.7, prior);
  CHECK(r.count == 7);
  CHECK(r.newly.popcount() == 7);

  prior.set(0, 0);
  prior.set(1, 1);
  prior.set(9, 9);
  r = threshold_mask(d, 0.7, prior);
  CHECK(r.count == 4);
  CHECK_FALSE(r.newly.test(0, 0));

  CHECK(threshold_mask(DistanceMap(3, 3, 3, std::vector<float>(9, 0.0f)), 0.7, PixelMask(3, 3)).count == 0);
  CHECK_THROWS_AS(threshold_mask(d, 0.0, prior), ConfigError);
  CHECK_THROWS_AS(threshold_mask(d, 1.8, prior), ConfigError);
  CHECK_THROWS_AS(threshold_mask(d, 0.7, PixelMask(9, 10)), DimensionError);
}

TEST_CASE("threshold_mask is monotone in lambda and masks only grow") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> uni(0.0f, 1.7f);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<float> values(12 * 9);
    for (auto& v : values) v = uni(rng);
    const DistanceMap d(12, 9, 3, values);
    PixelMask prior(12, 9);
    for (int i = 0; i < 20; ++i) prior.set(static_cast<int>(rng() % 12), static_cast<int>(rng() % 9));
    std::size_t last = threshold_mask(d, 0.05, prior).count;
    for (double lambda = 0.1; lambda < 1.7; lambda += 0.1) {
      const auto r = threshold_mask(d, lambda, prior);
      CHECK(r.count <= last);
      last = r.count;
      const auto grown = prior | r.newly;
      CHECK(grown.popcount() >= prior.popcount());
      CHECK((prior | prior) == prior);
    }
  }
}

TEST_CASE("apply_mask zeroes masked pixels only") {
  const auto img = constant_image(6, 5, 3, 0.8f);
  CHECK(apply_mask(img, PixelMask(6, 5)) == img);
  CHECK(apply_mask(img, PixelMask(6, 5).complement()) == ImageTensor(6, 5, 3, 0.0f));

  PixelMask corner(6, 5);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 2; ++x) corner.set(y, x);
  }
  const auto out = apply_mask(img, corner);
  int zeros = 0;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 5; ++x) {
      const bool zero = out.at(y, x, 0) == 0.0f && out.at(y, x, 1) == 0.0f && out.at(y, x, 2) == 0.0f;
      zeros += zero;
      if (!zero) CHECK(out.at(y, x, 1) == 0.8f);
    }
  }
  CHECK(zeros == 4);
  CHECK_THROWS_AS(apply_mask(img, PixelMask(5, 5)), DimensionError);
}

TEST_CASE("apply_mask is idempotent") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(9, 13, trial % 2 == 0 ? 3 : 1, rng());
    PixelMask m(9, 13);
    for (int i = 0; i < 30; ++i) m.set(static_cast<int>(rng() % 9), static_cast<int>(rng() % 13));
    const auto once = apply_mask(img, m);
    CHECK(apply_mask(once, m) == once);
  }
}

TEST_CASE("pixel mask set algebra") {
  PixelMask a(3, 3);
  PixelMask b(3, 3);
  a.set(0, 0);
  a.set(1, 1);
  b.set(1, 1);
  b.set(2, 2);
  CHECK((a | b).popcount() == 3);
  CHECK((a & b).popcount() == 1);
  PixelMask c = a;
  c.subtract(b);
  CHECK(c.popcount() == 1);
  CHECK(c.test(0, 0));
  CHECK(a.complement().popcount() == 7);
  CHECK_THROWS_AS(a |= PixelMask(3, 4), DimensionError);
}

TEST_CASE("png round trip and 8-bit encoding") {
  superpure::testing::TempDir dir("png");
  const auto img = random_image(7, 9, 3, 99);
  save_png(dir / "rgb.png", img);
  const auto loaded = load_png(dir / "rgb.png");
  CHECK(loaded == quantize_8bit(img));
  CHECK(superpure::testing::max_abs_diff(loaded, img) <= 0.5 / 255.0 + 1e-7);

  const auto gray = quantize_8bit(random_image(4, 6, 1, 5));
  save_png(dir / "gray.png", gray);
  CHECK(load_png(dir / "gray.png") == gray);

  PixelMask m(5, 4);
  m.set(1, 2);
  m.set(4, 3);
  save_mask_png(dir / "mask.png", m);
  CHECK(load_mask_png(dir / "mask.png") == m);
  CHECK(load_png(dir / "mask.png").at(1, 2, 0) == 1.0f);
  CHECK(load_png(dir / "mask.png").at(0, 0, 0) == 0.0f);

  CHECK_THROWS_AS(load_png(dir / "missing.png"), IoError);
  CHECK_THROWS_AS(save_png(dir / "no" / "such" / "dir.png", img), IoError);
}

}
