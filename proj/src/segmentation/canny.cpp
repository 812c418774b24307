#include "robovis/segmentation/canny.hpp"

#include <algorithm>
#include <cmath>

#include "robovis/error.hpp"

namespace robovis::seg {

std::size_t EdgeMap::count() const {
  return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), std::uint8_t{1}));
}

EdgeMap canny(const Image& img, double low, double high) {
  if (!(low > 0) || !(high > low)) throw InvalidArgument("canny thresholds must satisfy 0 < low < high");
  const int w = img.width(), h = img.height();
  const auto px = [&](int x, int y) {
    return static_cast<int>(img.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  std::vector<int> gx(static_cast<std::size_t>(w) * h), gy(gx.size());
  std::vector<float> mag(gx.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int a = px(x - 1, y - 1), b = px(x, y - 1), c = px(x + 1, y - 1);
      const int d = px(x - 1, y), f = px(x + 1, y);
      const int g = px(x - 1, y + 1), hh = px(x, y + 1), i = px(x + 1, y + 1);
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      gx[k] = (c + 2 * f + i) - (a + 2 * d + g);
      gy[k] = (g + 2 * hh + i) - (a + 2 * b + c);
      mag[k] = static_cast<float>(std::sqrt(double(gx[k]) * gx[k] + double(gy[k]) * gy[k]));
    }

  // 0 = below low, 1 = weak, 2 = strong; 1-px border is never an edge.
  std::vector<std::uint8_t> cls(gx.size(), 0);
  constexpr double kTan22 = 0.41421356237309503, kTan67 = 2.414213562373095;
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      const float m = mag[k];
      if (m < low) continue;
      const double ax = std::abs(gx[k]), ay = std::abs(gy[k]);
      std::ptrdiff_t step;  // offset to the neighbour along the negative gradient side
      if (ay <= ax * kTan22)
        step = 1;
      else if (ay >= ax * kTan67)
        step = w;
      else if ((gx[k] > 0) == (gy[k] > 0))
        step = w + 1;
      else
        step = w - 1;
      if (!(m > mag[k - step] && m >= mag[k + step])) continue;
      cls[k] = m >= high ? 2 : 1;
    }

  EdgeMap out{w, h, low, high, std::vector<std::uint8_t>(gx.size(), 0)};
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < cls.size(); ++k)
    if (cls[k] == 2 && !out.edges[k]) {
      out.edges[k] = 1;
      stack.push_back(k);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
            if (cls[q] && !out.edges[q]) {
              out.edges[q] = 1;
              stack.push_back(q);
            }
          }
      }
    }
  return out;
}

}  // namespace robovis::seg
