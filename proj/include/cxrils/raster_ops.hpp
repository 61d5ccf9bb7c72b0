#pragma once

#include <vector>

#include "cxrils/core.hpp"

namespace cxrils {

/// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double iou(const RasterMask& a, const RasterMask& b);

/// |inner ∩ outer| / |inner|. Throws on an empty inner mask.
double containment_ratio(const RasterMask& inner, const RasterMask& outer);

std::size_t intersection_count(const RasterMask& a, const RasterMask& b);
std::size_t union_count(const RasterMask& a, const RasterMask& b);

/// Maximal 8-connected components, ordered by their first member in
/// row-major order.
std::vector<RasterMask> connected_components(const RasterMask& m);

enum class MorphKind { Erode, Dilate };

/// Binary morphology with a full 3x3 element; pixels outside the grid count
/// as background.
RasterMask morph(const RasterMask& m, MorphKind kind, int iterations);
RasterMask opening(const RasterMask& m, int iterations);

/// Grows `m` by 8-adjacent pixels whose intensity lies within `delta` of the
/// current member mean. One round adds every qualifying neighbour at once.
RasterMask intensity_expand(const RasterMask& m, const ImageGray& image, double delta,
                            int max_rounds);

RasterMask box_to_mask(const DetectionBox& box, int width, int height);

}  // namespace cxrils
