#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "robovis/imaging/integral_image.hpp"

namespace robovis::cascade {

enum class HaarKind : int {
  EdgeVertical = 0,    ///< two cells side by side: dark | bright
  EdgeHorizontal = 1,  ///< two cells stacked
  Line = 2,            ///< three cells side by side, centre weighted 2
  Checker = 3,         ///< 2x2 diagonal
};

struct HaarRect {
  int x, y, w, h, weight;
};

/// Cells share one size, so the signed weights sum to zero over equal areas.
struct HaarFeature {
  HaarKind kind = HaarKind::EdgeVertical;
  int x = 0, y = 0;
  int cell_w = 1, cell_h = 1;

  int width() const;
  int height() const;
  int rect_count() const;
  /// Rectangles relative to the window origin.
  std::array<HaarRect, 4> rects() const;
  /// Origin and cell sizes multiplied by `scale` and rounded (cells >= 1 px).
  HaarFeature scaled(double scale) const;
  bool fits(int window_w, int window_h) const {
    return x >= 0 && y >= 0 && x + width() <= window_w && y + height() <= window_h;
  }

  friend bool operator==(const HaarFeature&, const HaarFeature&) = default;
};

/// Every placement and cell size of every kind inside a w x h window.
std::vector<HaarFeature> enumerate_features(int window_w, int window_h);

/// Σ weight · rect_sum with the feature placed at (ox, oy). Throws BoundsError
/// when it does not fit the table.
std::int64_t haar_raw(const HaarFeature& f, const IntegralImage& ii, int ox, int oy);
std::int64_t haar_raw_unchecked(const HaarFeature& f, const IntegralImage& ii, int ox, int oy);

/// Standard deviation of the pixels in [x, x+w) x [y, y+h), floored at 1.
double window_sigma(const IntegralImage& ii, const IntegralImage& sq, int x, int y, int w, int h);

/// Raw response divided by window sigma and cell area. Rounded to float so that
/// training and scanning compare identical values against stump thresholds.
inline float normalize_response(std::int64_t raw, double sigma, int cell_area) {
  return static_cast<float>(static_cast<double>(raw) / (sigma * cell_area));
}

/// Feature scaled by `scale` and evaluated at the window origin, variance normalized.
/// Throws InvalidArgument if the scaled feature overflows the window.
float eval_haar(const HaarFeature& f, const IntegralImage& ii, const IntegralImage& sq, const Window& window,
                double scale);

}  // namespace robovis::cascade
