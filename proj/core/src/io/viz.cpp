#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ucmar/io/viz.hpp"

namespace ucmar {
namespace {

constexpr int kGutter = 2;

unsigned char to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

struct Canvas {
  RgbImage img;
  void set(int y, int x, unsigned char r, unsigned char g, unsigned char b) {
    const std::size_t at = (static_cast<std::size_t>(y) * img.cols + x) * 3;
    img.rgb[at] = r;
    img.rgb[at + 1] = g;
    img.rgb[at + 2] = b;
  }
};

enum class TileKind { gray, heat };

void blit_tile(Canvas& canvas, const Image& src, TileKind kind, int top, int left,
               const std::optional<ZoomBox>& crop, int tile_size) {
  for (int y = 0; y < tile_size; ++y) {
    for (int x = 0; x < tile_size; ++x) {
      double v;
      if (crop) {
        const int sy = crop->y + y * crop->h / tile_size;
        const int sx = crop->x + x * crop->w / tile_size;
        v = src(sy, sx);
      } else {
        v = src(y, x);
      }
      if (kind == TileKind::heat) {
        const auto c = uncertainty_color(v);
        canvas.set(top + y, left + x, c[0], c[1], c[2]);
      } else {
        const unsigned char g = to_byte(v);
        canvas.set(top + y, left + x, g, g, g);
      }
    }
  }
}

void draw_box(Canvas& canvas, int top, int left, const ZoomBox& box) {
  for (int x = box.x; x < box.x + box.w; ++x) {
    canvas.set(top + box.y, left + x, 255, 255, 255);
    canvas.set(top + box.y + box.h - 1, left + x, 255, 255, 255);
  }
  for (int y = box.y; y < box.y + box.h; ++y) {
    canvas.set(top + y, left + box.x, 255, 255, 255);
    canvas.set(top + y, left + box.x + box.w - 1, 255, 255, 255);
  }
}

}  // namespace

std::array<unsigned char, 3> uncertainty_color(double u) {
  const double c = std::clamp(u, 0.0, 1.0);
  const double r = std::min(1.0, 3.0 * c);
  const double g = std::clamp(3.0 * c - 1.0, 0.0, 1.0);
  const double b = std::clamp(3.0 * c - 2.0, 0.0, 1.0);
  return {to_byte(r), to_byte(g), to_byte(b)};
}

RgbImage render_panel(const PanelInputs& inputs) {
  if (!inputs.corrupted || !inputs.uncertainty || !inputs.uc_restored || !inputs.ground_truth)
    throw std::invalid_argument("render_panel: missing input raster");
  if (inputs.restorations.empty())
    throw std::invalid_argument("render_panel: need at least one ensemble restoration");

  std::vector<std::pair<const Image*, TileKind>> tiles;
  tiles.emplace_back(inputs.corrupted, TileKind::gray);
  for (const Image* r : inputs.restorations) {
    if (!r) throw std::invalid_argument("render_panel: missing restoration raster");
    tiles.emplace_back(r, TileKind::gray);
  }
  tiles.emplace_back(inputs.uncertainty, TileKind::heat);
  tiles.emplace_back(inputs.uc_restored, TileKind::gray);
  tiles.emplace_back(inputs.ground_truth, TileKind::gray);

  const Image& first = *tiles.front().first;
  if (!first.square()) throw std::invalid_argument("render_panel: rasters must be square");
  const int grid = first.rows();
  for (const auto& [img, kind] : tiles)
    if (!img->same_shape(first))
      throw std::invalid_argument("render_panel: raster shapes differ");

  if (inputs.zoom) {
    const ZoomBox& z = *inputs.zoom;
    if (z.w < 2 || z.h < 2 || z.x < 0 || z.y < 0 || z.x + z.w > grid || z.y + z.h > grid)
      throw std::invalid_argument("render_panel: zoom box out of range");
  }

  const int n = static_cast<int>(tiles.size());
  const int rows_of_tiles = inputs.zoom ? 2 : 1;
  Canvas canvas;
  canvas.img.cols = n * grid + (n + 1) * kGutter;
  canvas.img.rows = rows_of_tiles * grid + (rows_of_tiles + 1) * kGutter;
  canvas.img.rgb.assign(static_cast<std::size_t>(canvas.img.rows) * canvas.img.cols * 3, 32);

  for (int t = 0; t < n; ++t) {
    const int left = kGutter + t * (grid + kGutter);
    blit_tile(canvas, *tiles[t].first, tiles[t].second, kGutter, left, std::nullopt, grid);
    if (inputs.zoom) {
      draw_box(canvas, kGutter, left, *inputs.zoom);
      blit_tile(canvas, *tiles[t].first, tiles[t].second, 2 * kGutter + grid, left,
                inputs.zoom, grid);
    }
  }
  return canvas.img;
}

}  // namespace ucmar
