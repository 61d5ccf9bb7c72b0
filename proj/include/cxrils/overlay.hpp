#pragma once

#include <filesystem>

#include "cxrils/core.hpp"
#include "cxrils/png_io.hpp"

namespace cxrils {

inline constexpr double kOverlayAlpha = 0.4;

/// Grayscale image as RGB with mask pixels blended toward red.
RgbImage render_overlay(const ImageGray& image, const RasterMask& mask,
                        double alpha = kOverlayAlpha);
void render_overlay(const ImageGray& image, const RasterMask& mask,
                    const std::filesystem::path& out_path, double alpha = kOverlayAlpha);

}  // namespace cxrils
