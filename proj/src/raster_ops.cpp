#include "cxrils/raster_ops.hpp"

#include <cmath>

namespace cxrils {

namespace {

void require_same(const RasterMask& a, const RasterMask& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DataError(std::string(op) + ": mask size mismatch " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

constexpr int kNeighbours[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                   {0, 1},   {1, -1}, {1, 0},  {1, 1}};

}  // namespace

std::size_t intersection_count(const RasterMask& a, const RasterMask& b) {
  require_same(a, b, "intersection");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) n += (a.bit(i) && b.bit(i)) ? 1 : 0;
  return n;
}

std::size_t union_count(const RasterMask& a, const RasterMask& b) {
  require_same(a, b, "union");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) n += (a.bit(i) || b.bit(i)) ? 1 : 0;
  return n;
}

double iou(const RasterMask& a, const RasterMask& b) {
  require_same(a, b, "iou");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.bits().size(); ++i) {
    const bool x = a.bit(i) != 0;
    const bool y = b.bit(i) != 0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double containment_ratio(const RasterMask& inner, const RasterMask& outer) {
  require_same(inner, outer, "containment_ratio");
  const auto n = inner.count();
  if (n == 0) throw DataError("containment_ratio: empty inner mask");
  return static_cast<double>(intersection_count(inner, outer)) / static_cast<double>(n);
}

std::vector<RasterMask> connected_components(const RasterMask& m) {
  const int w = m.width();
  const int h = m.height();
  std::vector<std::uint8_t> seen(m.bits().size(), 0);
  std::vector<RasterMask> out;
  std::vector<Pixel> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto idx = static_cast<std::size_t>(r) * w + c;
      if (!m.bit(idx) || seen[idx]) continue;
      RasterMask comp(w, h);
      seen[idx] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        auto p = stack.back();
        stack.pop_back();
        comp.insert(p.row, p.col);
        for (const auto& d : kNeighbours) {
          const int rr = p.row + d[0];
          const int cc = p.col + d[1];
          if (!m.contains(rr, cc)) continue;
          const auto j = static_cast<std::size_t>(rr) * w + cc;
          if (seen[j]) continue;
          seen[j] = 1;
          stack.push_back({rr, cc});
        }
      }
      out.push_back(std::move(comp));
    }
  }
  return out;
}

RasterMask morph(const RasterMask& m, MorphKind kind, int iterations) {
  if (iterations < 0) throw DataError("morph: negative iteration count");
  RasterMask cur = m;
  const int w = m.width();
  const int h = m.height();
  for (int it = 0; it < iterations; ++it) {
    RasterMask next(w, h);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        bool hit = kind == MorphKind::Erode;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const bool v = cur.contains(r + dr, c + dc);
            if (kind == MorphKind::Erode) {
              hit = hit && v;
            } else {
              hit = hit || v;
            }
          }
        }
        if (hit) next.insert(r, c);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

RasterMask opening(const RasterMask& m, int iterations) {
  return morph(morph(m, MorphKind::Erode, iterations), MorphKind::Dilate, iterations);
}

RasterMask intensity_expand(const RasterMask& m, const ImageGray& image, double delta,
                            int max_rounds) {
  if (m.width() != image.width() || m.height() != image.height()) {
    throw DataError("intensity_expand: mask and image sizes differ");
  }
  if (delta < 0) throw DataError("intensity_expand: negative delta");
  RasterMask cur = m;
  const int w = m.width();
  const int h = m.height();
  for (int round = 0; round < max_rounds; ++round) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (cur.contains(r, c)) {
          sum += image.at(r, c);
          ++n;
        }
      }
    }
    if (n == 0) break;
    const double mean = sum / static_cast<double>(n);
    RasterMask next = cur;
    bool grew = false;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (cur.contains(r, c)) continue;
        if (std::fabs(image.at(r, c) - mean) > delta) continue;
        for (const auto& d : kNeighbours) {
          if (cur.contains(r + d[0], c + d[1])) {
            next.insert(r, c);
            grew = true;
            break;
          }
        }
      }
    }
    cur = std::move(next);
    if (!grew) break;
  }
  return cur;
}

RasterMask box_to_mask(const DetectionBox& box, int width, int height) {
  if (box.x_min < 0 || box.y_min < 0 || box.x_max >= width || box.y_max >= height ||
      box.x_min > box.x_max || box.y_min > box.y_max) {
    throw DataError("box_to_mask: box outside " + std::to_string(width) + "x" +
                    std::to_string(height) + " grid");
  }
  return RasterMask::rectangle(width, height, box.y_min, box.x_min, box.y_max, box.x_max);
}

}  // namespace cxrils
