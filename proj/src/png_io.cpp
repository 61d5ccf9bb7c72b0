#include "cxrils/png_io.hpp"

#include <png.h>

#include <cstring>

namespace cxrils {

namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<std::uint8_t> read_raw(const std::filesystem::path& path, std::uint32_t format,
                                   bool require_gray8, int& width, int& height) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + png.image.message);
  }
  if (require_gray8 && (png.image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_LINEAR)) != 0) {
    throw DataError(path.string() + ": expected 8-bit grayscale PNG");
  }
  png.image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw DataError("cannot decode PNG " + path.string() + ": " + png.image.message);
  }
  width = static_cast<int>(png.image.width);
  height = static_cast<int>(png.image.height);
  return buffer;
}

void write_raw(const std::filesystem::path& path, const std::uint8_t* data, int width,
               int height, std::uint32_t format) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(width);
  png.image.height = static_cast<png_uint_32>(height);
  png.image.format = format;
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, data, 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + png.image.message);
  }
}

}  // namespace

ImageGray read_png_gray(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto raw = read_raw(path, PNG_FORMAT_GRAY, true, w, h);
  return ImageGray(w, h, std::vector<std::uint16_t>(raw.begin(), raw.end()), 8);
}

void write_png_gray(const std::filesystem::path& path, const ImageGray& image) {
  if (image.bit_depth() != 8) throw DataError("only 8-bit images can be written as PNG");
  std::vector<std::uint8_t> raw(image.pixels().begin(), image.pixels().end());
  write_raw(path, raw.data(), image.width(), image.height(), PNG_FORMAT_GRAY);
}

RasterMask read_png_mask(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto raw = read_raw(path, PNG_FORMAT_GRAY, true, w, h);
  RasterMask mask(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (raw[static_cast<std::size_t>(r) * w + c] != 0) mask.insert(r, c);
    }
  }
  return mask;
}

void write_png_mask(const std::filesystem::path& path, const RasterMask& mask) {
  std::vector<std::uint8_t> raw(mask.bits().size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = mask.bit(i) ? 255 : 0;
  write_raw(path, raw.data(), mask.width(), mask.height(), PNG_FORMAT_GRAY);
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  RgbImage img;
  img.rgb = read_raw(path, PNG_FORMAT_RGB, false, img.width, img.height);
  return img;
}

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  write_raw(path, image.rgb.data(), image.width, image.height, PNG_FORMAT_RGB);
}

std::string encode_png_rgb(const RgbImage& image) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width);
  png.image.height = static_cast<png_uint_32>(image.height);
  png.image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, image.rgb.data(), 0, nullptr)) {
    throw DataError(std::string("cannot size PNG: ") + png.image.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, image.rgb.data(), 0,
                                 nullptr)) {
    throw DataError(std::string("cannot encode PNG: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace cxrils
