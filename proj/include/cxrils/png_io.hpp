#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cxrils/core.hpp"

namespace cxrils {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  bool operator==(const RgbImage&) const = default;
};

/// Reads an 8-bit grayscale PNG. Anything else is rejected with DataError.
ImageGray read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const ImageGray& image);

/// Masks are 8-bit grayscale PNGs; nonzero pixels are members.
RasterMask read_png_mask(const std::filesystem::path& path);
void write_png_mask(const std::filesystem::path& path, const RasterMask& mask);

RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);
std::string encode_png_rgb(const RgbImage& image);

}  // namespace cxrils
