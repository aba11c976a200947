#include <png.h>

#include <cstdio>
#include <stdexcept>

#include "ucmar/errors.hpp"
#include "ucmar/io/png_io.hpp"

namespace ucmar {

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.rows < 1 || image.cols < 1 ||
      image.rgb.size() != static_cast<std::size_t>(image.rows) * image.cols * 3)
    throw std::invalid_argument("write_png: malformed RGB buffer");

  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw IoError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("png writer initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("png encoding failed for " + path.string());
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.cols),
               static_cast<png_uint_32>(image.rows), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.rows; ++y)
    png_write_row(png, const_cast<png_bytep>(image.rgb.data() +
                                             static_cast<std::size_t>(y) * image.cols * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace ucmar
