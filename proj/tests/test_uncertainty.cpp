#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "support/subprocess.hpp"
#include "ucmar/errors.hpp"
#include "ucmar/model/checkpoint.hpp"
#include "ucmar/uncertainty/store.hpp"
#include "ucmar/uncertainty/uncertainty.hpp"

using namespace ucmar;

namespace {

Image two_pixel(double a, double b) {
  Image img(1, 2, 0.0);
  img(0, 0) = a;
  img(0, 1) = b;
  return img;
}

std::vector<Image> random_stack(std::uint64_t seed, std::size_t n, int rows, int cols) {
  std::vector<Image> stack;
  for (std::size_t i = 0; i < n; ++i)
    stack.push_back(oracle::random_image(seed * 131 + i + 1, rows, cols));
  return stack;
}

double max_abs_diff(const Image& a, const Image& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

bool images_identical(const Image& a, const Image& b) {
  return a.same_shape(b) && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("two restorations: agreeing pixel maps to 0, disagreeing pixel to 1") {
  // Pixel 0: {0.5, 0.5} -> std 0. Pixel 1: {0.1, 0.3} -> std 0.1 (population).
  const std::vector<Image> stack{two_pixel(0.5, 0.1), two_pixel(0.5, 0.3)};
  const Image s = std_image(stack);
  CHECK(s(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  const UncertaintyMap u = compute_uncertainty(stack);
  CHECK(u.values(0, 0) == 0.0);
  CHECK(u.values(0, 1) == 1.0);
}

TEST_CASE("three restorations reproduce the hand-computed standard deviation") {
  // Pixel 0: {0, 1, 2} -> mean 1, population std sqrt(2/3). Pixel 1 constant.
  const std::vector<Image> stack{two_pixel(0.0, 1.0), two_pixel(1.0, 1.0), two_pixel(2.0, 1.0)};
  const Image s = std_image(stack);
  CHECK(s(0, 0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(s(0, 1) == 0.0);
  const UncertaintyMap u = compute_uncertainty(stack);
  CHECK(u.values(0, 0) == 1.0);
  CHECK(u.values(0, 1) == 0.0);

  // Sample divisor: sqrt(2 / 2) = 1.
  CHECK(std_image(stack, StdDivisor::sample)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical restorations give the all-zero map") {
  const Image img = oracle::random_image(3, 8, 8);
  const UncertaintyMap u = compute_uncertainty({img, img, img});
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(u.values.data()[i] == 0.0);
}

TEST_CASE("streaming std agrees with the two-pass reference") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 5;
    const auto stack = random_stack(trial + 1, n, 8, 8);
    for (StdDivisor d : {StdDivisor::population, StdDivisor::sample}) {
      const Image got = std_image(stack, d);
      const auto want = oracle::two_pass_std(stack, d == StdDivisor::population);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(std::abs(got(y, x) - want(y, x)) <= 1e-12);
    }
  }
}

TEST_CASE("normalized maps attain 0 and 1 exactly") {
  for (int trial = 0; trial < 25; ++trial) {
    const UncertaintyMap u = compute_uncertainty(random_stack(trial + 500, 3, 8, 8));
    double lo = 2.0, hi = -1.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      lo = std::min(lo, u.values.data()[i]);
      hi = std::max(hi, u.values.data()[i]);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
}

TEST_CASE("uncertainty is invariant to shift, positive scale, and stack order") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 4;
    const auto stack = random_stack(trial + 1000, n, 8, 8);
    const UncertaintyMap base = compute_uncertainty(stack);

    // Shift every restoration by the same constant.
    std::vector<Image> shifted = stack;
    const double c = 0.37 + 0.01 * trial;
    for (Image& img : shifted)
      for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] += c;
    CHECK(max_abs_diff(compute_uncertainty(shifted).values, base.values) <= 1e-12);

    // Scale by a positive constant.
    std::vector<Image> scaled = stack;
    const double a = 0.5 + 0.03 * trial;
    for (Image& img : scaled)
      for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] *= a;
    CHECK(max_abs_diff(compute_uncertainty(scaled).values, base.values) <= 1e-12);

    // Permute the stack.
    std::vector<Image> shuffled = stack;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(max_abs_diff(compute_uncertainty(shuffled).values, base.values) <= 1e-12);
  }
}

TEST_CASE("a constant std surface normalizes to all zeros") {
  // Two constant rasters: every pixel sees the same pair of values, so the
  // std surface is bitwise constant and min-max normalization is degenerate.
  const UncertaintyMap u = compute_uncertainty({Image(8, 8, 0.1), Image(8, 8, 0.7)});
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(u.values.data()[i] == 0.0);
}

TEST_CASE("uncertainty inputs are validated") {
  const Image img = oracle::random_image(9, 8, 8);
  CHECK_THROWS_AS(compute_uncertainty({img}), std::invalid_argument);
  CHECK_THROWS_AS(compute_uncertainty({}), std::invalid_argument);
  CHECK_THROWS_AS(compute_uncertainty({img, Image(8, 9, 0.0)}), std::invalid_argument);
  Image nan_img = img;
  nan_img(2, 2) = std::nan("");
  CHECK_THROWS_AS(compute_uncertainty({img, nan_img}), InvalidInputError);
}

TEST_CASE("ensemble inference runs checkpoints in ascending epoch order") {
  const auto dir = testsup::scratch_dir("ensemble");
  CheckpointSet set;
  for (int epoch : {2, 4, 6}) {
    Unet<float> model({2, 8, 32}, static_cast<std::uint64_t>(epoch));
    set.members.push_back(
        save_checkpoint(model, epoch, 0.1, "t", dir / ("e" + std::to_string(epoch) + ".uckp")));
  }
  const Image input = oracle::random_image(10, 32, 32);
  const std::vector<Image> outs = ensemble_infer(set, input);
  REQUIRE(outs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    // Each output is exactly what the materialized member computes.
    Unet<float> member = materialize(set.members[static_cast<std::size_t>(i)]);
    CHECK(images_identical(outs[static_cast<std::size_t>(i)], member.restore(input)));
  }
  // Distinctly parameterized members produce distinct restorations.
  CHECK_FALSE(images_identical(outs[0], outs[1]));

  // Fewer than two members is not an ensemble.
  CheckpointSet tiny;
  tiny.members.push_back(set.members[0]);
  CHECK_THROWS_AS(ensemble_infer(tiny, input), std::invalid_argument);

  // Mixed architectures are rejected.
  CheckpointSet mixed = set;
  Unet<float> other({3, 8, 64}, 0);
  mixed.members.push_back(save_checkpoint(other, 8, 0.1, "t", dir / "other.uckp"));
  CHECK_THROWS_AS(ensemble_infer(mixed, Image(64, 64, 0.0)), IncompatibleCheckpointError);

  // Epochs must strictly increase.
  CheckpointSet dup = set;
  dup.members.push_back(dup.members.back());
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
}

TEST_CASE("the hi/lo profile summarizes where uncertainty concentrates") {
  MaskRaster hi(4, 4, std::uint8_t{0});
  MaskRaster lo(4, 4, std::uint8_t{0});
  hi(0, 0) = hi(0, 1) = 1;
  lo(3, 2) = lo(3, 3) = 1;

  // All-zero map: both means are zero.
  UncertaintyMap zero{Image(4, 4, 0.0), "s", {2, 4}};
  auto [h0, l0] = uncertainty_profile(zero, hi, lo);
  CHECK(h0 == 0.0);
  CHECK(l0 == 0.0);

  // Indicator of the hi region: means are exactly (1, 0).
  UncertaintyMap ind{Image(4, 4, 0.0), "s", {2, 4}};
  ind.values(0, 0) = ind.values(0, 1) = 1.0;
  auto [h1, l1] = uncertainty_profile(ind, hi, lo);
  CHECK(h1 == 1.0);
  CHECK(l1 == 0.0);

  // Overlapping or empty masks are contract violations.
  MaskRaster overlap = lo;
  overlap(0, 0) = 1;
  CHECK_THROWS_AS(uncertainty_profile(ind, hi, overlap), std::invalid_argument);
  CHECK_THROWS_AS(uncertainty_profile(ind, hi, MaskRaster(4, 4, std::uint8_t{0})),
                  std::invalid_argument);

  // Non-finite map values are invalid input.
  UncertaintyMap bad = ind;
  bad.values(2, 2) = std::nan("");
  CHECK_THROWS_AS(uncertainty_profile(bad, hi, lo), InvalidInputError);
}

TEST_CASE("the store round trips maps through disk") {
  const auto dir = testsup::scratch_dir("ustore");
  UncertaintyStore store = UncertaintyStore::create(dir, {2, 4, 6}, StdDivisor::population);
  std::vector<UncertaintyMap> maps;
  for (int i = 0; i < 3; ++i) {
    UncertaintyMap m = compute_uncertainty(random_stack(i + 77, 3, 8, 8));
    m.source_sample_id = "train-00" + std::to_string(i);
    m.source_epochs = {2, 4, 6};
    store.put(m);
    maps.push_back(std::move(m));
  }

  // Unfinalized stores cannot be reopened.
  CHECK_THROWS(UncertaintyStore::open(dir));
  store.finalize();

  UncertaintyStore back = UncertaintyStore::open(dir);
  CHECK(back.size() == 3);
  CHECK(back.source_epochs() == std::vector<int>{2, 4, 6});
  CHECK(back.divisor() == StdDivisor::population);
  for (const auto& m : maps) {
    REQUIRE(back.contains(m.source_sample_id));
    const UncertaintyMap& got = back.get(m.source_sample_id);
    // Stored values are float32-quantized; the in-memory store applies the
    // same quantization so both views agree exactly.
    CHECK(images_identical(got.values, store.get(m.source_sample_id).values));
    CHECK(max_abs_diff(got.values, m.values) <= 1e-7);
  }
  CHECK_FALSE(back.contains("train-999"));
  CHECK_THROWS_AS(back.get("train-999"), IncompleteStoreError);
}

TEST_CASE("rebuilding a store from the same inputs is byte-identical") {
  auto build = [](const std::filesystem::path& dir) {
    UncertaintyStore store = UncertaintyStore::create(dir, {1, 2}, StdDivisor::population);
    for (int i = 0; i < 2; ++i) {
      UncertaintyMap m = compute_uncertainty(random_stack(i + 9, 2, 8, 8));
      m.source_sample_id = "train-00" + std::to_string(i);
      m.source_epochs = {1, 2};
      store.put(m);
    }
    store.finalize();
  };
  const auto a = testsup::scratch_dir("ustore-a");
  const auto b = testsup::scratch_dir("ustore-b");
  build(a);
  build(b);
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CHECK(testsup::file_bytes(entry.path()) == testsup::file_bytes(b / name));
  }
}
