#include "ucmar/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ucmar/errors.hpp"

namespace ucmar {
namespace {

constexpr char kMagic[4] = {'U', 'C', 'M', 'R'};

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

struct Header {
  std::uint32_t rows, cols, tag;
};

Header parse_header(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw IoError("not a UCMR raster file: " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  Header h{get_u32(p + 4), get_u32(p + 8), get_u32(p + 12)};
  if (h.rows == 0 || h.cols == 0)
    throw IoError("UCMR raster with empty dimensions: " + path.string());
  return h;
}

}  // namespace

void write_raster_f32(const std::filesystem::path& path, const Image& image) {
  std::string bytes;
  bytes.reserve(16 + image.size() * 4);
  bytes.append(kMagic, 4);
  put_u32(bytes, static_cast<std::uint32_t>(image.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(image.cols()));
  put_u32(bytes, kRasterTagF32);
  for (std::size_t i = 0; i < image.size(); ++i)
    put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(image[i])));
  write_file(path, bytes);
}

Image read_raster_f32(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const Header h = parse_header(bytes, path);
  if (h.tag != kRasterTagF32)
    throw IoError("expected float32 raster (tag 1), got tag " + std::to_string(h.tag) + ": " +
                  path.string());
  const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
  if (bytes.size() != 16 + count * 4)
    throw IoError("truncated raster payload: " + path.string());
  Image image(static_cast<int>(h.rows), static_cast<int>(h.cols));
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 16;
  for (std::size_t i = 0; i < count; ++i, p += 4)
    image[i] = static_cast<double>(std::bit_cast<float>(get_u32(p)));
  return image;
}

void write_raster_u8(const std::filesystem::path& path, const MaskRaster& mask) {
  std::string bytes;
  bytes.reserve(16 + mask.size());
  bytes.append(kMagic, 4);
  put_u32(bytes, static_cast<std::uint32_t>(mask.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(mask.cols()));
  put_u32(bytes, kRasterTagU8);
  bytes.append(reinterpret_cast<const char*>(mask.data()), mask.size());
  write_file(path, bytes);
}

MaskRaster read_raster_u8(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const Header h = parse_header(bytes, path);
  if (h.tag != kRasterTagU8)
    throw IoError("expected uint8 raster (tag 2), got tag " + std::to_string(h.tag) + ": " +
                  path.string());
  const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
  if (bytes.size() != 16 + count)
    throw IoError("truncated raster payload: " + path.string());
  MaskRaster mask(static_cast<int>(h.rows), static_cast<int>(h.cols));
  std::memcpy(mask.data(), bytes.data() + 16, count);
  return mask;
}

Image quantize_f32(const Image& image) {
  Image out(image.rows(), image.cols());
  for (std::size_t i = 0; i < image.size(); ++i)
    out[i] = static_cast<double>(static_cast<float>(image[i]));
  return out;
}

}  // namespace ucmar
