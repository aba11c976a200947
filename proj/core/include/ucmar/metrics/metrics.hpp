#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ucmar/model/unet.hpp"
#include "ucmar/raster.hpp"
#include "ucmar/sim/synthesis.hpp"

namespace ucmar {

/// Peak signal-to-noise ratio 10*log10(data_range^2 / MSE) in dB over the
/// counted (non-metal when masked) pixels. Identical images return +infinity
/// (callers flag it as "identical"). Throws std::invalid_argument on shape
/// mismatch, non-positive data_range, or an all-masked image.
double psnr(const Image& pred, const Image& gt, double data_range = 1.0,
            const MaskRaster* metal_mask = nullptr);

/// Mean structural similarity with Gaussian window weighting (sigma 1.5),
/// C1 = (k1*range)^2, C2 = (k2*range)^2. Windows are fully interior
/// (valid-mode borders) and averaged over centers that are non-metal.
/// Throws std::invalid_argument when the window is even/too small, the image
/// is smaller than the window, or no window centers remain.
double ssim(const Image& pred, const Image& gt, double data_range = 1.0, int window = 11,
            double k1 = 0.01, double k2 = 0.03, const MaskRaster* metal_mask = nullptr);

struct EvalPolicy {
  bool exclude_metal = true;
  double data_range = 1.0;
};

struct MetricRow {
  std::string tag;        // e.g. "baseline", "uc"
  bool uc_loss = false;   // trained with the uncertainty-weighted loss?
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  int sample_count = 0;
  int failed_samples = 0;
  std::string mask_policy;  // "exclude-metal" or "include-metal"
};

struct MetricReport {
  std::vector<MetricRow> rows;
};

/// Restores every test sample and aggregates mean PSNR/SSIM. Per-sample
/// metric failures are counted in failed_samples and excluded from means.
MetricRow evaluate(const Unet<float>& model, const std::vector<PairedSample>& test_set,
                   const EvalPolicy& policy, const std::string& tag, bool uc_loss_flag);

/// Relative improvement in percent, truncated (not rounded) to 2 decimals:
/// (38.21 -> 41.33) gives 8.16.
double improvement_percent(double baseline, double improved);

/// Report serializations: JSON, and an aligned text table with per-metric
/// improvement columns relative to the first non-UC row (when present).
nlohmann::json metric_report_json(const MetricReport& report);
std::string metric_report_table(const MetricReport& report);

}  // namespace ucmar
