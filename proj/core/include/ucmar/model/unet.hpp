#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucmar/raster.hpp"

namespace ucmar {

/// Shape of the restoration network; the parameter count is a pure function
/// of these three values (see unet_parameter_count).
struct ArchitectureConfig {
  int depth = 3;          // downsampling stages
  int base_channels = 16; // channels after the stem convolution
  int grid_size = 64;     // square input side length

  void validate() const;
  bool operator==(const ArchitectureConfig&) const = default;
};

std::size_t unet_parameter_count(const ArchitectureConfig& config);

/// Encoder-decoder restoration network with skip connections and a residual
/// head (output = input + predicted correction).
///
/// Every convolution except the 1x1 head is followed by per-sample instance
/// normalization (learned scale/shift) and LeakyReLU(0.1), so inference
/// depends only on the single input image — batch composition cannot change
/// results. The template parameter selects parameter/activation precision:
/// float for training/checkpoints, double for finite-difference verification.
template <typename S>
class Unet {
 public:
  struct TensorInfo {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;  // element offset into the flat parameter vector
    std::size_t count = 0;
  };

  /// Scratch + cached activations for one forward/backward pass.
  struct Workspace {
    std::vector<std::vector<S>> y;    // per-layer output (post norm+act)
    std::vector<std::vector<S>> z;    // per-layer convolution output (pre-norm)
    std::vector<std::vector<S>> mu;   // per-layer per-channel mean
    std::vector<std::vector<S>> isg;  // per-layer per-channel 1/sqrt(var+eps)
    std::vector<std::vector<S>> cat;  // concatenated input of decoder layers
    std::vector<std::vector<S>> dy;   // backward: per-layer output gradient
    std::vector<S> input;             // the image, in S precision
    std::vector<S> col;               // im2col scratch
    std::vector<S> dcol;
  };

  /// Builds the network with He-style fan-in initialization, deterministic
  /// in seed. Throws std::invalid_argument on invalid configuration.
  Unet(const ArchitectureConfig& config, std::uint64_t seed);

  /// Rebuilds a network around an existing flat parameter vector (checkpoint
  /// restore). Throws std::invalid_argument when the size does not match the
  /// configuration.
  Unet(const ArchitectureConfig& config, std::vector<S> parameters);

  const ArchitectureConfig& config() const { return config_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::vector<S>& parameters() { return params_; }
  const std::vector<S>& parameters() const { return params_; }
  const std::vector<TensorInfo>& tensor_table() const { return table_; }

  /// Inference: maps an image to its restoration. Deterministic; safe to
  /// call concurrently from multiple threads on one instance. Throws
  /// std::invalid_argument when the grid size differs from the model's.
  Image restore(const Image& image) const;

  /// Training forward pass; caches activations in the workspace.
  Image forward(const Image& image, Workspace& ws) const;

  /// Backpropagates d(loss)/d(prediction) through the cached pass,
  /// accumulating parameter gradients into grad (size parameter_count()).
  void backward(const Image& grad_pred, Workspace& ws, std::vector<S>& grad) const;

 private:
  struct Layer {
    std::string name;
    int in_ch, out_ch, kernel, stride;
    int in_size, out_size;  // spatial side lengths
    bool normed;            // instance norm + activation follow the conv
    int input;              // producing layer index, -1 = the image
    int skip;               // decoder: layer whose output is concatenated, else -1
    std::size_t w_off, b_off, g_off, h_off;
  };

  void build_layers();
  void init_parameters(std::uint64_t seed);
  void run_forward(const Image& image, Workspace& ws) const;

  ArchitectureConfig config_;
  std::vector<Layer> layers_;
  std::vector<S> params_;
  std::vector<TensorInfo> table_;
};

extern template class Unet<float>;
extern template class Unet<double>;

}  // namespace ucmar
