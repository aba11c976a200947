#pragma once

#include <filesystem>
#include <vector>

namespace ucmar {

/// Row-major 8-bit RGB buffer (3 bytes per pixel).
struct RgbImage {
  int rows = 0;
  int cols = 0;
  std::vector<unsigned char> rgb;
};

/// Writes an 8-bit RGB PNG. Throws IoError on failure.
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace ucmar
