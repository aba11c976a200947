#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gemm.hpp"
#include "ucmar/model/unet.hpp"
#include "ucmar/rng.hpp"

namespace ucmar {
namespace {

constexpr double kNormEps = 1e-5;
constexpr double kLeakySlope = 0.1;

int level_channels(const ArchitectureConfig& c, int level) {
  return c.base_channels << level;
}

std::string tag(const char* base, int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%d", base, k);
  return buf;
}

// im2col for a square layer: col[(ic*K+ky)*K+kx][oy*W'+ox] = in[ic][oy*s+ky-p][ox*s+kx-p]
template <typename S>
void im2col(const S* in, int channels, int size, int kernel, int stride, int out_size, S* col) {
  const int pad = kernel / 2;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  const std::size_t out_plane = static_cast<std::size_t>(out_size) * out_size;
  S* dst = col;
  for (int ic = 0; ic < channels; ++ic) {
    const S* src = in + ic * plane;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < out_size; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= size) {
            for (int ox = 0; ox < out_size; ++ox) dst[oy * out_size + ox] = 0;
            continue;
          }
          const S* row = src + static_cast<std::size_t>(iy) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[oy * out_size + ox] = (ix >= 0 && ix < size) ? row[ix] : S(0);
          }
        }
        dst += out_plane;
      }
    }
  }
}

// Scatter-add transpose of im2col: din[...] += col[...]
template <typename S>
void col2im_add(const S* col, int channels, int size, int kernel, int stride, int out_size,
                S* din) {
  const int pad = kernel / 2;
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  const std::size_t out_plane = static_cast<std::size_t>(out_size) * out_size;
  const S* src = col;
  for (int ic = 0; ic < channels; ++ic) {
    S* dst = din + ic * plane;
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        for (int oy = 0; oy < out_size; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= size) continue;
          S* row = dst + static_cast<std::size_t>(iy) * size;
          for (int ox = 0; ox < out_size; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < size) row[ix] += src[oy * out_size + ox];
          }
        }
        src += out_plane;
      }
    }
  }
}

template <typename S>
void upsample2_nearest(const S* in, int channels, int size, S* out) {
  const int out_size = size * 2;
  for (int c = 0; c < channels; ++c) {
    const S* src = in + static_cast<std::size_t>(c) * size * size;
    S* dst = out + static_cast<std::size_t>(c) * out_size * out_size;
    for (int y = 0; y < out_size; ++y) {
      const S* row = src + static_cast<std::size_t>(y / 2) * size;
      for (int x = 0; x < out_size; ++x) dst[y * out_size + x] = row[x / 2];
    }
  }
}

// Adjoint of nearest-neighbor x2 upsampling: each coarse cell collects its 2x2 block.
template <typename S>
void upsample2_backward_add(const S* dout, int channels, int size, S* din) {
  const int out_size = size * 2;
  for (int c = 0; c < channels; ++c) {
    const S* src = dout + static_cast<std::size_t>(c) * out_size * out_size;
    S* dst = din + static_cast<std::size_t>(c) * size * size;
    for (int y = 0; y < size; ++y) {
      const S* r0 = src + static_cast<std::size_t>(2 * y) * out_size;
      const S* r1 = r0 + out_size;
      for (int x = 0; x < size; ++x)
        dst[y * size + x] += (r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]);
    }
  }
}

}  // namespace

void ArchitectureConfig::validate() const {
  if (depth < 2 || depth > 4)
    throw std::invalid_argument("ArchitectureConfig: depth must be in [2, 4]");
  if (base_channels < 8 || base_channels > 64)
    throw std::invalid_argument("ArchitectureConfig: base_channels must be in [8, 64]");
  if (grid_size < (1 << depth) || grid_size % (1 << depth) != 0)
    throw std::invalid_argument(
        "ArchitectureConfig: grid_size must be divisible by 2^depth");
}

std::size_t unet_parameter_count(const ArchitectureConfig& config) {
  config.validate();
  auto conv = [](int ic, int oc, int k, bool normed) {
    return static_cast<std::size_t>(k) * k * ic * oc + oc + (normed ? 2 * oc : 0);
  };
  std::size_t total = conv(1, level_channels(config, 0), 3, true);
  for (int k = 1; k <= config.depth; ++k) {
    const int lo = level_channels(config, k - 1);
    const int hi = level_channels(config, k);
    total += conv(lo, hi, 3, true) + conv(hi, hi, 3, true);
  }
  for (int k = config.depth; k >= 1; --k) {
    const int lo = level_channels(config, k - 1);
    const int hi = level_channels(config, k);
    total += conv(hi + lo, lo, 3, true);
  }
  total += conv(level_channels(config, 0), 1, 1, false);
  return total;
}

template <typename S>
void Unet<S>::build_layers() {
  const int depth = config_.depth;
  const int grid = config_.grid_size;
  auto add = [this](std::string name, int ic, int oc, int kernel, int stride, int in_size,
                    bool normed, int input, int skip) {
    Layer ly;
    ly.name = std::move(name);
    ly.in_ch = ic;
    ly.out_ch = oc;
    ly.kernel = kernel;
    ly.stride = stride;
    ly.in_size = in_size;
    ly.out_size = in_size / stride;
    ly.normed = normed;
    ly.input = input;
    ly.skip = skip;
    layers_.push_back(std::move(ly));
  };

  add("stem", 1, level_channels(config_, 0), 3, 1, grid, true, -1, -1);
  for (int k = 1; k <= depth; ++k) {
    const int lo = level_channels(config_, k - 1);
    const int hi = level_channels(config_, k);
    const int size = grid >> (k - 1);
    const int prev = static_cast<int>(layers_.size()) - 1;
    add(tag("down", k), lo, hi, 3, 2, size, true, prev, -1);
    add(tag("enc", k), hi, hi, 3, 1, size / 2, true, prev + 1, -1);
  }
  for (int k = depth; k >= 1; --k) {
    const int lo = level_channels(config_, k - 1);
    const int hi = level_channels(config_, k);
    const int prev = static_cast<int>(layers_.size()) - 1;
    const int skip = (k == 1) ? 0 : 2 * (k - 1);  // stem or enc_{k-1}
    add(tag("dec", k), hi + lo, lo, 3, 1, grid >> (k - 1), true, prev, skip);
  }
  add("head", level_channels(config_, 0), 1, 1, 1, grid, false,
      static_cast<int>(layers_.size()) - 1, -1);

  // Assign flat-parameter offsets and the tensor table.
  std::size_t off = 0;
  for (Layer& ly : layers_) {
    const std::size_t w_count =
        static_cast<std::size_t>(ly.kernel) * ly.kernel * ly.in_ch * ly.out_ch;
    ly.w_off = off;
    table_.push_back({ly.name + ".weight", {ly.out_ch, ly.in_ch, ly.kernel, ly.kernel}, off,
                      w_count});
    off += w_count;
    ly.b_off = off;
    table_.push_back({ly.name + ".bias", {ly.out_ch}, off, static_cast<std::size_t>(ly.out_ch)});
    off += ly.out_ch;
    if (ly.normed) {
      ly.g_off = off;
      table_.push_back(
          {ly.name + ".gamma", {ly.out_ch}, off, static_cast<std::size_t>(ly.out_ch)});
      off += ly.out_ch;
      ly.h_off = off;
      table_.push_back(
          {ly.name + ".beta", {ly.out_ch}, off, static_cast<std::size_t>(ly.out_ch)});
      off += ly.out_ch;
    } else {
      ly.g_off = ly.h_off = 0;
    }
  }
  params_.resize(off);
}

template <typename S>
void Unet<S>::init_parameters(std::uint64_t seed) {
  Rng rng(seed);
  for (const Layer& ly : layers_) {
    const std::size_t w_count =
        static_cast<std::size_t>(ly.kernel) * ly.kernel * ly.in_ch * ly.out_ch;
    const double stddev = std::sqrt(2.0 / (static_cast<double>(ly.kernel) * ly.kernel * ly.in_ch));
    for (std::size_t i = 0; i < w_count; ++i)
      params_[ly.w_off + i] = static_cast<S>(rng.normal() * stddev);
    for (int c = 0; c < ly.out_ch; ++c) params_[ly.b_off + c] = S(0);
    if (ly.normed) {
      for (int c = 0; c < ly.out_ch; ++c) params_[ly.g_off + c] = S(1);
      for (int c = 0; c < ly.out_ch; ++c) params_[ly.h_off + c] = S(0);
    }
  }
}

template <typename S>
Unet<S>::Unet(const ArchitectureConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  build_layers();
  init_parameters(seed);
}

template <typename S>
Unet<S>::Unet(const ArchitectureConfig& config, std::vector<S> parameters) : config_(config) {
  config_.validate();
  build_layers();
  if (parameters.size() != params_.size())
    throw std::invalid_argument("Unet: parameter vector size does not match configuration");
  params_ = std::move(parameters);
}

template <typename S>
void Unet<S>::run_forward(const Image& image, Workspace& ws) const {
  if (image.rows() != config_.grid_size || image.cols() != config_.grid_size)
    throw std::invalid_argument("Unet: image grid size does not match the model");

  const int L = static_cast<int>(layers_.size());
  ws.y.resize(L);
  ws.z.resize(L);
  ws.mu.resize(L);
  ws.isg.resize(L);
  ws.cat.resize(L);
  ws.input.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) ws.input[i] = static_cast<S>(image[i]);

  for (int li = 0; li < L; ++li) {
    const Layer& ly = layers_[li];
    const std::size_t in_plane = static_cast<std::size_t>(ly.in_size) * ly.in_size;
    const std::size_t out_plane = static_cast<std::size_t>(ly.out_size) * ly.out_size;

    const S* src;
    if (ly.skip >= 0) {
      // Decoder input: x2-upsampled previous output, then the skip tensor.
      const Layer& from = layers_[ly.input];
      std::vector<S>& cat = ws.cat[li];
      cat.resize(static_cast<std::size_t>(ly.in_ch) * in_plane);
      upsample2_nearest(ws.y[ly.input].data(), from.out_ch, from.out_size, cat.data());
      const std::vector<S>& skip = ws.y[ly.skip];
      std::copy(skip.begin(), skip.end(),
                cat.begin() + static_cast<std::size_t>(from.out_ch) * in_plane);
      src = cat.data();
    } else if (ly.input < 0) {
      src = ws.input.data();
    } else {
      src = ws.y[ly.input].data();
    }

    // Convolution via im2col + GEMM (1x1 convolutions use the input directly).
    const int N = static_cast<int>(out_plane);
    const int K = ly.kernel * ly.kernel * ly.in_ch;
    const S* col = src;
    if (ly.kernel != 1 || ly.stride != 1) {
      ws.col.resize(static_cast<std::size_t>(K) * N);
      im2col(src, ly.in_ch, ly.in_size, ly.kernel, ly.stride, ly.out_size, ws.col.data());
      col = ws.col.data();
    }
    std::vector<S>& z = ws.z[li];
    z.resize(static_cast<std::size_t>(ly.out_ch) * out_plane);
    for (int oc = 0; oc < ly.out_ch; ++oc)
      std::fill_n(z.begin() + static_cast<std::size_t>(oc) * out_plane, out_plane,
                  params_[ly.b_off + oc]);
    detail::gemm_nn(ly.out_ch, N, K, params_.data() + ly.w_off, col, z.data());

    std::vector<S>& y = ws.y[li];
    y.resize(z.size());
    if (!ly.normed) {
      y = z;
      continue;
    }

    // Instance normalization (per-channel statistics over the plane, eps
    // inside the root) followed by LeakyReLU.
    std::vector<S>& mu = ws.mu[li];
    std::vector<S>& isg = ws.isg[li];
    mu.resize(ly.out_ch);
    isg.resize(ly.out_ch);
    for (int oc = 0; oc < ly.out_ch; ++oc) {
      const S* zp = z.data() + static_cast<std::size_t>(oc) * out_plane;
      S* yp = y.data() + static_cast<std::size_t>(oc) * out_plane;
      double sum = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) sum += static_cast<double>(zp[i]);
      const double mean = sum / static_cast<double>(out_plane);
      double var = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) {
        const double d = static_cast<double>(zp[i]) - mean;
        var += d * d;
      }
      var /= static_cast<double>(out_plane);
      const double inv_sigma = 1.0 / std::sqrt(var + kNormEps);
      mu[oc] = static_cast<S>(mean);
      isg[oc] = static_cast<S>(inv_sigma);
      const S g = params_[ly.g_off + oc];
      const S b = params_[ly.h_off + oc];
      const S m = mu[oc];
      const S is = isg[oc];
      for (std::size_t i = 0; i < out_plane; ++i) {
        const S v = g * ((zp[i] - m) * is) + b;
        yp[i] = v > S(0) ? v : static_cast<S>(kLeakySlope) * v;
      }
    }
  }
}

template <typename S>
Image Unet<S>::forward(const Image& image, Workspace& ws) const {
  run_forward(image, ws);
  const std::vector<S>& correction = ws.y.back();
  Image pred(image.rows(), image.cols());
  for (std::size_t i = 0; i < pred.size(); ++i)
    pred[i] = static_cast<double>(static_cast<S>(ws.input[i] + correction[i]));
  return pred;
}

template <typename S>
Image Unet<S>::restore(const Image& image) const {
  // One workspace per thread: keeps restore() const and safe to call
  // concurrently while avoiding a multi-megabyte allocation per call.
  thread_local Workspace ws;
  return forward(image, ws);
}

template <typename S>
void Unet<S>::backward(const Image& grad_pred, Workspace& ws, std::vector<S>& grad) const {
  if (grad.size() != params_.size())
    throw std::invalid_argument("Unet: gradient vector size does not match parameters");
  if (grad_pred.rows() != config_.grid_size || grad_pred.cols() != config_.grid_size)
    throw std::invalid_argument("Unet: gradient grid size does not match the model");
  const int L = static_cast<int>(layers_.size());
  if (ws.y.size() != static_cast<std::size_t>(L) || ws.y.back().empty())
    throw std::invalid_argument("Unet: backward called without a cached forward pass");

  ws.dy.resize(L);
  for (int li = 0; li < L; ++li) {
    const Layer& ly = layers_[li];
    ws.dy[li].assign(static_cast<std::size_t>(ly.out_ch) * ly.out_size * ly.out_size, S(0));
  }
  // The residual head: d(pred)/d(correction) = 1.
  std::vector<S>& dhead = ws.dy[L - 1];
  for (std::size_t i = 0; i < grad_pred.size(); ++i) dhead[i] = static_cast<S>(grad_pred[i]);

  std::vector<S> din;
  for (int li = L - 1; li >= 0; --li) {
    const Layer& ly = layers_[li];
    const std::size_t out_plane = static_cast<std::size_t>(ly.out_size) * ly.out_size;
    const std::size_t in_plane = static_cast<std::size_t>(ly.in_size) * ly.in_size;
    std::vector<S>& dz = ws.dy[li];  // reused in place: dy -> dpre -> dz

    if (ly.normed) {
      const std::vector<S>& z = ws.z[li];
      const std::vector<S>& y = ws.y[li];
      for (int oc = 0; oc < ly.out_ch; ++oc) {
        const S* zp = z.data() + static_cast<std::size_t>(oc) * out_plane;
        const S* yp = y.data() + static_cast<std::size_t>(oc) * out_plane;
        S* dp = dz.data() + static_cast<std::size_t>(oc) * out_plane;
        const S m = ws.mu[li][oc];
        const S is = ws.isg[li][oc];
        const S g = params_[ly.g_off + oc];
        // LeakyReLU is sign-preserving, so the cached output selects the slope.
        double sum_d = 0.0, sum_dx = 0.0;
        for (std::size_t i = 0; i < out_plane; ++i) {
          const S dpre = dp[i] * (yp[i] > S(0) ? S(1) : static_cast<S>(kLeakySlope));
          dp[i] = dpre;
          const S xhat = (zp[i] - m) * is;
          sum_d += static_cast<double>(dpre);
          sum_dx += static_cast<double>(dpre) * static_cast<double>(xhat);
        }
        grad[ly.h_off + oc] += static_cast<S>(sum_d);
        grad[ly.g_off + oc] += static_cast<S>(sum_dx);
        const S mean_d = static_cast<S>(sum_d / static_cast<double>(out_plane));
        const S mean_dx = static_cast<S>(sum_dx / static_cast<double>(out_plane));
        const S gis = g * is;
        for (std::size_t i = 0; i < out_plane; ++i) {
          const S xhat = (zp[i] - m) * is;
          dp[i] = gis * (dp[i] - mean_d - xhat * mean_dx);
        }
      }
    }

    // Convolution backward: bias, weights, then the input gradient.
    for (int oc = 0; oc < ly.out_ch; ++oc) {
      const S* dp = dz.data() + static_cast<std::size_t>(oc) * out_plane;
      double s = 0.0;
      for (std::size_t i = 0; i < out_plane; ++i) s += static_cast<double>(dp[i]);
      grad[ly.b_off + oc] += static_cast<S>(s);
    }

    const S* src;
    if (ly.skip >= 0) {
      src = ws.cat[li].data();
    } else if (ly.input < 0) {
      src = ws.input.data();
    } else {
      src = ws.y[ly.input].data();
    }
    const int N = static_cast<int>(out_plane);
    const int K = ly.kernel * ly.kernel * ly.in_ch;
    const S* col = src;
    if (ly.kernel != 1 || ly.stride != 1) {
      ws.col.resize(static_cast<std::size_t>(K) * N);
      im2col(src, ly.in_ch, ly.in_size, ly.kernel, ly.stride, ly.out_size, ws.col.data());
      col = ws.col.data();
    }
    detail::gemm_nt(ly.out_ch, N, K, dz.data(), col, grad.data() + ly.w_off);

    const bool want_din = ly.input >= 0 || ly.skip >= 0;
    if (!want_din) continue;

    din.assign(static_cast<std::size_t>(ly.in_ch) * in_plane, S(0));
    if (ly.kernel != 1 || ly.stride != 1) {
      ws.dcol.assign(static_cast<std::size_t>(K) * N, S(0));
      detail::gemm_tn(ly.out_ch, N, K, params_.data() + ly.w_off, dz.data(), ws.dcol.data());
      col2im_add(ws.dcol.data(), ly.in_ch, ly.in_size, ly.kernel, ly.stride, ly.out_size,
                 din.data());
    } else {
      detail::gemm_tn(ly.out_ch, N, K, params_.data() + ly.w_off, dz.data(), din.data());
    }

    if (ly.skip >= 0) {
      const Layer& from = layers_[ly.input];
      upsample2_backward_add(din.data(), from.out_ch, from.out_size, ws.dy[ly.input].data());
      const std::size_t split = static_cast<std::size_t>(from.out_ch) * in_plane;
      std::vector<S>& dskip = ws.dy[ly.skip];
      for (std::size_t i = 0; i < dskip.size(); ++i) dskip[i] += din[split + i];
    } else {
      std::vector<S>& dprev = ws.dy[ly.input];
      for (std::size_t i = 0; i < dprev.size(); ++i) dprev[i] += din[i];
    }
  }
}

template class Unet<float>;
template class Unet<double>;

}  // namespace ucmar
