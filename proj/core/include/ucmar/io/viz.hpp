#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ucmar/io/png_io.hpp"
#include "ucmar/raster.hpp"

namespace ucmar {

struct ZoomBox {
  int x = 0, y = 0, w = 0, h = 0;
};

/// One figure row per sample: corrupted input, the per-epoch ensemble
/// restorations, the uncertainty heatmap, the final restoration, and the
/// ground truth. All rasters must share the grid size.
struct PanelInputs {
  const Image* corrupted = nullptr;
  std::vector<const Image*> restorations;
  const Image* uncertainty = nullptr;
  const Image* uc_restored = nullptr;
  const Image* ground_truth = nullptr;
  std::optional<ZoomBox> zoom;  // adds a zoomed second row + box markers
};

/// Fixed [0, 1] heat colormap (black -> red -> yellow -> white) used for
/// every uncertainty tile, so color is comparable across panels.
std::array<unsigned char, 3> uncertainty_color(double u);

/// Deterministic tile compositor. Grayscale tiles clamp values to [0, 1].
/// Throws std::invalid_argument on missing inputs, shape mismatch, or an
/// out-of-range zoom box.
RgbImage render_panel(const PanelInputs& inputs);

}  // namespace ucmar
