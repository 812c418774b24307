#pragma once

// Independent verification of floodcanny output.

#include <string>
#include <vector>

#include "robovis/segmentation/proposals.hpp"

namespace robovis::testing {

/// Empty on success, otherwise a description of the first violated property:
/// labels disjoint by construction of the raster, so this checks that each
/// label's pixel set matches its Region record, is 4-connected, edge-free and
/// at least min_area.
inline std::string check_regions(const seg::Segmentation& s, const seg::EdgeMap& e, int min_area) {
  const int w = s.width, h = s.height;
  std::vector<int> area(s.regions.size() + 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = s.label_at(x, y);
      if (l < 0 || l > static_cast<int>(s.regions.size())) return "label out of range";
      if (l > 0 && e.at(x, y)) return "edge pixel inside region " + std::to_string(l);
      ++area[l];
    }
  std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
  for (const auto& r : s.regions) {
    if (area[r.label] != r.area) return "area mismatch for region " + std::to_string(r.label);
    if (r.area < min_area) return "region below min_area";
    if (s.label_at(r.seed.x, r.seed.y) != r.label) return "seed outside its region";
    // BFS from the seed over 4-neighbours with the same label must reach every pixel.
    std::vector<std::size_t> q = {static_cast<std::size_t>(r.seed.y) * w + r.seed.x};
    seen[q[0]] = 1;
    int reached = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      ++reached;
      const int x = static_cast<int>(q[i] % w), y = static_cast<int>(q[i] / w);
      const int nx[4] = {x - 1, x + 1, x, x}, ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t p = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (!seen[p] && s.labels[p] == r.label) {
          seen[p] = 1;
          q.push_back(p);
        }
      }
    }
    if (reached != r.area) return "region " + std::to_string(r.label) + " is not 4-connected";
  }
  return {};
}

}  // namespace robovis::testing
