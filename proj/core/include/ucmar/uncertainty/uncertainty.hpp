#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ucmar/model/checkpoint.hpp"
#include "ucmar/raster.hpp"

namespace ucmar {

enum class StdDivisor { population, sample };  // divisor N vs N-1

/// Per-pixel disagreement of the checkpoint ensemble, min-max rescaled so
/// min == 0 and max == 1 exactly (all zeros when the std is constant).
struct UncertaintyMap {
  Image values;
  std::string source_sample_id;
  std::vector<int> source_epochs;
};

/// Per-pixel standard deviation over a stack of identically shaped rasters
/// (no normalization). Throws std::invalid_argument for < 2 rasters or shape
/// mismatch, InvalidInputError for non-finite values.
Image std_image(const std::vector<Image>& stack, StdDivisor divisor = StdDivisor::population);

/// Per-pixel std followed by min-max rescaling to [0, 1]. A constant std
/// surface (e.g. identical restorations) yields the all-zero map.
UncertaintyMap compute_uncertainty(const std::vector<Image>& restorations,
                                   StdDivisor divisor = StdDivisor::population);

/// Runs every checkpoint of the set on one image, in ascending-epoch order.
/// Each output equals materialize(member).restore(image) exactly.
std::vector<Image> ensemble_infer(const CheckpointSet& checkpoints, const Image& image);

/// Mean uncertainty over two disjoint nonempty pixel sets (diagnostic for
/// "does U highlight artifact regions"): returns (mean over hi, mean over lo).
std::pair<double, double> uncertainty_profile(const UncertaintyMap& map,
                                              const MaskRaster& mask_hi,
                                              const MaskRaster& mask_lo);

}  // namespace ucmar
