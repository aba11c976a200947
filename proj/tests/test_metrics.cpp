#include <cmath>
#include <limits>

#include "doctest.h"
#include "support/oracles.hpp"
#include "ucmar/metrics/metrics.hpp"
#include "ucmar/model/unet.hpp"
#include "ucmar/raster_io.hpp"
#include "ucmar/sim/dataset.hpp"

using namespace ucmar;

TEST_CASE("identical images score infinite psnr and unit ssim") {
  const Image img = oracle::random_image(1, 32, 32);
  CHECK(std::isinf(psnr(img, img)));
  CHECK(psnr(img, img) > 0.0);
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a uniform residual of 0.1 at unit range is exactly 20 dB") {
  const Image gt(32, 32, 0.4);
  const Image pred(32, 32, 0.5);
  CHECK(psnr(pred, gt, 1.0) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("psnr and ssim agree with their definitional references") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Image a = oracle::random_image(trial * 2 + 1, 16, 16);
    const Image b = oracle::random_image(trial * 2 + 2, 16, 16);
    CHECK(std::abs(psnr(a, b) - oracle::psnr(a, b, 1.0)) <= 1e-9);
    CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b, 1.0)) <= 1e-6);

    // Masked variants agree too.
    MaskRaster mask(16, 16, std::uint8_t{0});
    mask(static_cast<int>(trial % 16), static_cast<int>((trial * 7) % 16)) = 1;
    CHECK(std::abs(psnr(a, b, 1.0, &mask) - oracle::psnr(a, b, 1.0, &mask)) <= 1e-9);
    CHECK(std::abs(ssim(a, b, 1.0, 11, 0.01, 0.03, &mask) -
                   oracle::ssim(a, b, 1.0, 11, 1.5, 0.01, 0.03, &mask)) <= 1e-6);
  }
}

TEST_CASE("masking a high-error region raises psnr") {
  const Image gt = oracle::random_image(5, 32, 32);
  Image pred = gt;
  MaskRaster mask(32, 32, std::uint8_t{0});
  for (int y = 10; y < 16; ++y)
    for (int x = 10; x < 16; ++x) {
      pred(y, x) += 0.8;  // concentrated damage
      mask(y, x) = 1;
    }
  pred(0, 0) += 1e-3;  // keep the masked result finite
  CHECK(psnr(pred, gt, 1.0, &mask) > psnr(pred, gt, 1.0));
}

TEST_CASE("both metrics are symmetric in their arguments") {
  const Image a = oracle::random_image(6, 16, 16);
  const Image b = oracle::random_image(7, 16, 16);
  CHECK(psnr(a, b) == psnr(b, a));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("psnr decreases strictly as noise grows") {
  const Image gt = oracle::random_image(8, 32, 32);
  const Image noise = oracle::random_image(9, 32, 32, -1.0, 1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    Image pred = gt;
    for (std::size_t i = 0; i < pred.size(); ++i) pred.data()[i] += amp * noise.data()[i];
    const double p = psnr(pred, gt);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim separates structure from its inverse") {
  // A binary pattern against its negative: means match locally but the
  // covariance flips sign, driving similarity well below zero.
  Image gt(32, 32, 0.0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) gt(y, x) = ((x / 4 + y / 4) % 2 == 0) ? 1.0 : 0.0;
  Image inv(32, 32, 0.0);
  for (std::size_t i = 0; i < inv.size(); ++i) inv.data()[i] = 1.0 - gt.data()[i];
  const double s = ssim(inv, gt);
  CHECK(s < 1.0);
  CHECK(s < 0.0);

  // Two equal constants are perfectly similar.
  CHECK(ssim(Image(32, 32, 0.3), Image(32, 32, 0.3)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metric preconditions are enforced") {
  const Image img = oracle::random_image(10, 16, 16);
  CHECK_THROWS_AS(psnr(img, Image(16, 17, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(psnr(img, img, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ssim(img, img, 1.0, 4), std::invalid_argument);   // even window
  CHECK_THROWS_AS(ssim(img, img, 1.0, 1), std::invalid_argument);   // degenerate window
  CHECK_THROWS_AS(ssim(Image(8, 8, 0.0), Image(8, 8, 0.0)), std::invalid_argument);  // < window
  MaskRaster all(16, 16, std::uint8_t{1});
  CHECK_THROWS_AS(psnr(img, img, 1.0, &all), std::invalid_argument);
}

TEST_CASE("improvement percent truncates toward zero at two decimals") {
  CHECK(improvement_percent(38.21, 41.33) == 8.16);
  // 0.874 -> 0.891 is +1.9450...%, truncated to 1.94.
  CHECK(improvement_percent(0.874, 0.891) == 1.94);
  CHECK(improvement_percent(2.0, 1.0) == -50.0);
  CHECK(improvement_percent(3.0, 3.0) == 0.0);
  CHECK_THROWS_AS(improvement_percent(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("an identity network on undamaged inputs evaluates as a perfect restorer") {
  // Zero parameters + residual head = identity; feeding clean images as the
  // corrupted input must score SSIM 1 and flag PSNR as identical (infinite).
  DatasetConfig dc;
  dc.grid_size = 32;
  dc.train_count = 1;
  dc.test_count = 3;
  Dataset ds = synthesize_dataset(dc);
  for (PairedSample& s : ds.test) {
    // The pipeline always consumes float32 rasters from disk; quantize so the
    // float-precision network can reproduce its input bit for bit.
    s.clean = quantize_f32(s.clean);
    s.corrupted = s.clean;
  }

  const ArchitectureConfig arch{2, 8, 32};
  Unet<float> identity(arch, std::vector<float>(unet_parameter_count(arch), 0.0f));
  const MetricRow row = evaluate(identity, ds.test, EvalPolicy{}, "identity", false);
  CHECK(row.sample_count == 3);
  CHECK(row.failed_samples == 0);
  CHECK(std::isinf(row.mean_psnr));
  CHECK(row.mean_ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reports carry improvement columns relative to the first plain row") {
  MetricReport report;
  report.rows.push_back({"baseline", false, 38.21, 0.874, 50, 0, "exclude-metal"});
  report.rows.push_back({"uc", true, 41.33, 0.891, 50, 0, "exclude-metal"});

  const auto j = metric_report_json(report);
  REQUIRE(j["rows"].size() == 2);
  CHECK_FALSE(j["rows"][0].contains("psnr_improvement_percent"));
  CHECK(j["rows"][1]["psnr_improvement_percent"].get<double>() == 8.16);
  CHECK(j["rows"][1]["ssim_improvement_percent"].get<double>() == 1.94);

  const std::string table = metric_report_table(report);
  CHECK(table.find("baseline") != std::string::npos);
  CHECK(table.find("uc") != std::string::npos);
  CHECK(table.find("8.16") != std::string::npos);
}
