// Test helpers: temporary directories, random generators and brute-force
// oracles that share no code with the library under test.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cxrils/core.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("cxrils_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

/// Plain 0/1 grid, grid[row][col].
using Grid = std::vector<std::vector<int>>;

inline Grid make_grid(int w, int h) { return Grid(static_cast<std::size_t>(h), std::vector<int>(static_cast<std::size_t>(w), 0)); }

inline Grid to_grid(const cxrils::RasterMask& m) {
  Grid g = make_grid(m.width(), m.height());
  for (int r = 0; r < m.height(); ++r)
    for (int c = 0; c < m.width(); ++c) g[r][c] = m.contains(r, c) ? 1 : 0;
  return g;
}

inline cxrils::RasterMask to_mask(const Grid& g) {
  const int h = static_cast<int>(g.size());
  const int w = h ? static_cast<int>(g[0].size()) : 0;
  cxrils::RasterMask m(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (g[r][c]) m.insert(r, c);
  return m;
}

inline Grid random_grid(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  Grid g = make_grid(w, h);
  for (auto& row : g)
    for (auto& v : row) v = on(rng) ? 1 : 0;
  return g;
}

inline Grid rect_grid(int w, int h, int r0, int c0, int r1, int c1) {
  Grid g = make_grid(w, h);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) g[r][c] = 1;
  return g;
}

inline long count(const Grid& a) {
  long n = 0;
  for (const auto& row : a)
    for (int v : row) n += v;
  return n;
}

inline long count_and(const Grid& a, const Grid& b) {
  long n = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c) n += (a[r][c] && b[r][c]) ? 1 : 0;
  return n;
}

inline long count_or(const Grid& a, const Grid& b) {
  long n = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < a[r].size(); ++c) n += (a[r][c] || b[r][c]) ? 1 : 0;
  return n;
}

/// num/den >= pct/100 in exact integer arithmetic.
inline bool ratio_at_least(long num, long den, int pct) { return num * 100 >= static_cast<long>(pct) * den; }

/// Union-find over 8-neighbours; returns a label per cell (-1 for background)
/// where equal labels mean same component.
inline std::vector<std::vector<int>> union_find_labels(const Grid& g) {
  const int h = static_cast<int>(g.size());
  const int w = h ? static_cast<int>(g[0].size()) : 0;
  std::vector<int> parent(static_cast<std::size_t>(w * h));
  for (int i = 0; i < w * h; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (!g[r][c]) continue;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w || !g[rr][cc]) continue;
          parent[find(r * w + c)] = find(rr * w + cc);
        }
    }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(h), std::vector<int>(static_cast<std::size_t>(w), -1));
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (g[r][c]) out[r][c] = find(r * w + c);
  return out;
}

/// Brute-force lesion mask: every anomaly cell whose component has a member
/// inside any of the given inclusive boxes (x0, y0, x1, y1).
inline Grid union_of_hit_components(const Grid& anomaly, const std::vector<std::array<int, 4>>& boxes) {
  const auto labels = union_find_labels(anomaly);
  std::set<int> hit;
  for (const auto& b : boxes)
    for (int r = b[1]; r <= b[3]; ++r)
      for (int c = b[0]; c <= b[2]; ++c)
        if (labels[r][c] >= 0) hit.insert(labels[r][c]);
  Grid out = make_grid(anomaly.empty() ? 0 : static_cast<int>(anomaly[0].size()), static_cast<int>(anomaly.size()));
  for (std::size_t r = 0; r < anomaly.size(); ++r)
    for (std::size_t c = 0; c < anomaly[r].size(); ++c)
      if (labels[r][c] >= 0 && hit.count(labels[r][c])) out[r][c] = 1;
  return out;
}

/// Per-pixel 3x3 erosion/dilation, outside cells as background.
inline Grid brute_morph(const Grid& g, bool erode) {
  const int h = static_cast<int>(g.size());
  const int w = h ? static_cast<int>(g[0].size()) : 0;
  Grid out = make_grid(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      bool all = true, any = false;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          const bool v = rr >= 0 && cc >= 0 && rr < h && cc < w && g[rr][cc];
          all = all && v;
          any = any || v;
        }
      out[r][c] = erode ? all : any;
    }
  return out;
}

}  // namespace testing_support
