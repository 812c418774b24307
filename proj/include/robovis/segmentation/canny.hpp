#pragma once

#include <cstdint>
#include <vector>

#include "robovis/imaging/image.hpp"

namespace robovis::seg {

struct EdgeMap {
  int width = 0, height = 0;
  double low = 0, high = 0;
  std::vector<std::uint8_t> edges;  ///< 1 on edge pixels

  bool at(int x, int y) const { return edges[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

/// Sobel gradients (no pre-smoothing), L2 magnitude, four-direction non-maximum
/// suppression and 8-connected hysteresis. Thresholds apply to the magnitude of
/// the 3x3 Sobel response on 8-bit intensities. Requires 0 < low < high.
EdgeMap canny(const Image& img, double low = 40.0, double high = 100.0);

}  // namespace robovis::seg
