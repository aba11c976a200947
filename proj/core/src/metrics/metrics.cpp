#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ucmar/metrics/metrics.hpp"

namespace ucmar {
namespace {

void check_pair(const Image& pred, const Image& gt, double data_range,
                const MaskRaster* metal_mask) {
  if (!pred.same_shape(gt)) throw std::invalid_argument("metrics: pred and gt shapes differ");
  if (data_range <= 0.0) throw std::invalid_argument("metrics: data_range must be > 0");
  if (metal_mask && (metal_mask->rows() != pred.rows() || metal_mask->cols() != pred.cols()))
    throw std::invalid_argument("metrics: metal mask shape differs from pred");
}

std::vector<double> gaussian_kernel(int window, double sigma) {
  std::vector<double> k(window);
  const double c = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable weighted local sums over the valid (fully interior) region.
// in: H x W, out: (H - window + 1) x (W - window + 1).
Raster<double> local_mean(const Image& in, const std::vector<double>& kernel) {
  const int w = static_cast<int>(kernel.size());
  const int rows = in.rows(), cols = in.cols();
  const int out_cols = cols - w + 1;
  Raster<double> horiz(rows, out_cols, 0.0);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < out_cols; ++x) {
      double s = 0.0;
      for (int i = 0; i < w; ++i) s += kernel[i] * in(y, x + i);
      horiz(y, x) = s;
    }
  }
  const int out_rows = rows - w + 1;
  Raster<double> out(out_rows, out_cols, 0.0);
  for (int y = 0; y < out_rows; ++y) {
    for (int x = 0; x < out_cols; ++x) {
      double s = 0.0;
      for (int i = 0; i < w; ++i) s += kernel[i] * horiz(y + i, x);
      out(y, x) = s;
    }
  }
  return out;
}

Image elementwise_product(const Image& a, const Image& b) {
  Image out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace

double psnr(const Image& pred, const Image& gt, double data_range,
            const MaskRaster* metal_mask) {
  check_pair(pred, gt, data_range, metal_mask);
  double sum = 0.0;
  int counted = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (metal_mask && (*metal_mask)[i]) continue;
    const double r = pred[i] - gt[i];
    sum += r * r;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("psnr: mask excludes every pixel");
  const double mse = sum / counted;
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const Image& pred, const Image& gt, double data_range, int window, double k1,
            double k2, const MaskRaster* metal_mask) {
  check_pair(pred, gt, data_range, metal_mask);
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("ssim: window must be odd and >= 3");
  if (pred.rows() < window || pred.cols() < window)
    throw std::invalid_argument("ssim: image smaller than the window");

  const std::vector<double> kernel = gaussian_kernel(window, 1.5);
  const Raster<double> mu_x = local_mean(pred, kernel);
  const Raster<double> mu_y = local_mean(gt, kernel);
  const Raster<double> xx = local_mean(elementwise_product(pred, pred), kernel);
  const Raster<double> yy = local_mean(elementwise_product(gt, gt), kernel);
  const Raster<double> xy = local_mean(elementwise_product(pred, gt), kernel);

  const double c1 = (k1 * data_range) * (k1 * data_range);
  const double c2 = (k2 * data_range) * (k2 * data_range);
  const int r = window / 2;

  double sum = 0.0;
  int counted = 0;
  for (int y = 0; y < mu_x.rows(); ++y) {
    for (int x = 0; x < mu_x.cols(); ++x) {
      if (metal_mask && (*metal_mask)(y + r, x + r)) continue;
      const double mx = mu_x(y, x), my = mu_y(y, x);
      const double vx = xx(y, x) - mx * mx;
      const double vy = yy(y, x) - my * my;
      const double cxy = xy(y, x) - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
      const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
      sum += num / den;
      ++counted;
    }
  }
  if (counted == 0) throw std::invalid_argument("ssim: mask excludes every window center");
  return sum / counted;
}

MetricRow evaluate(const Unet<float>& model, const std::vector<PairedSample>& test_set,
                   const EvalPolicy& policy, const std::string& tag, bool uc_loss_flag) {
  if (test_set.empty()) throw std::invalid_argument("evaluate: empty test set");
  MetricRow row;
  row.tag = tag;
  row.uc_loss = uc_loss_flag;
  row.mask_policy = policy.exclude_metal ? "exclude-metal" : "include-metal";
  double psnr_sum = 0.0, ssim_sum = 0.0;
  for (const PairedSample& sample : test_set) {
    try {
      const Image restored = model.restore(sample.corrupted);
      const MaskRaster* mask = policy.exclude_metal ? &sample.mask.mask : nullptr;
      psnr_sum += psnr(restored, sample.clean, policy.data_range, mask);
      ssim_sum += ssim(restored, sample.clean, policy.data_range, 11, 0.01, 0.03, mask);
      ++row.sample_count;
    } catch (const std::exception&) {
      ++row.failed_samples;
    }
  }
  if (row.sample_count > 0) {
    row.mean_psnr = psnr_sum / row.sample_count;
    row.mean_ssim = ssim_sum / row.sample_count;
  }
  return row;
}

double improvement_percent(double baseline, double improved) {
  if (baseline == 0.0) throw std::invalid_argument("improvement_percent: zero baseline");
  const double ratio = (improved - baseline) / baseline;
  return std::trunc(ratio * 10000.0) / 100.0;
}

nlohmann::json metric_report_json(const MetricReport& report) {
  const MetricRow* base = nullptr;
  for (const MetricRow& row : report.rows)
    if (!row.uc_loss) {
      base = &row;
      break;
    }
  nlohmann::json rows = nlohmann::json::array();
  for (const MetricRow& row : report.rows) {
    nlohmann::json j{{"tag", row.tag},
                     {"uc_loss", row.uc_loss},
                     {"mean_psnr", row.mean_psnr},
                     {"mean_ssim", row.mean_ssim},
                     {"sample_count", row.sample_count},
                     {"failed_samples", row.failed_samples},
                     {"mask_policy", row.mask_policy}};
    if (base && &row != base) {
      j["psnr_improvement_percent"] = improvement_percent(base->mean_psnr, row.mean_psnr);
      j["ssim_improvement_percent"] = improvement_percent(base->mean_ssim, row.mean_ssim);
    }
    rows.push_back(std::move(j));
  }
  return nlohmann::json{{"rows", std::move(rows)}};
}

std::string metric_report_table(const MetricReport& report) {
  const MetricRow* base = nullptr;
  for (const MetricRow& row : report.rows)
    if (!row.uc_loss) {
      base = &row;
      break;
    }
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-8s %-18s %-18s %-8s %-14s\n", "method",
                "UC loss", "PSNR (dB)", "SSIM", "samples", "mask policy");
  out += line;
  out += std::string(80, '-') + "\n";
  for (const MetricRow& row : report.rows) {
    char psnr_col[40], ssim_col[40];
    if (base && &row != base) {
      std::snprintf(psnr_col, sizeof(psnr_col), "%.2f (%+.2f%%)", row.mean_psnr,
                    improvement_percent(base->mean_psnr, row.mean_psnr));
      std::snprintf(ssim_col, sizeof(ssim_col), "%.3f (%+.2f%%)", row.mean_ssim,
                    improvement_percent(base->mean_ssim, row.mean_ssim));
    } else {
      std::snprintf(psnr_col, sizeof(psnr_col), "%.2f", row.mean_psnr);
      std::snprintf(ssim_col, sizeof(ssim_col), "%.3f", row.mean_ssim);
    }
    std::snprintf(line, sizeof(line), "%-12s %-8s %-18s %-18s %-8d %-14s\n", row.tag.c_str(),
                  row.uc_loss ? "yes" : "no", psnr_col, ssim_col, row.sample_count,
                  row.mask_policy.c_str());
    out += line;
  }
  return out;
}

}  // namespace ucmar
