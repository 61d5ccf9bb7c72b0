#include "cxrils/overlay.hpp"

#include <cmath>

namespace cxrils {

RgbImage render_overlay(const ImageGray& image, const RasterMask& mask, double alpha) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw DataError("overlay: image is " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " but mask is " +
                    std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  }
  RgbImage out{image.width(), image.height(), {}};
  out.rgb.resize(static_cast<std::size_t>(image.width()) * image.height() * 3);
  const double scale = 255.0 / image.max_intensity();
  std::size_t k = 0;
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double g = image.at(r, c) * scale;
      double rgb[3] = {g, g, g};
      if (mask.contains(r, c)) {
        rgb[0] = (1 - alpha) * g + alpha * 255.0;
        rgb[1] = (1 - alpha) * g;
        rgb[2] = (1 - alpha) * g;
      }
      for (double v : rgb) out.rgb[k++] = static_cast<std::uint8_t>(std::lround(v));
    }
  }
  return out;
}

void render_overlay(const ImageGray& image, const RasterMask& mask,
                    const std::filesystem::path& out_path, double alpha) {
  write_png_rgb(out_path, render_overlay(image, mask, alpha));
}

}  // namespace cxrils
