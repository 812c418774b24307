#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robovis/imaging/geometry.hpp"
#include "robovis/imaging/image.hpp"

namespace robovis {

/// Summed-area table with one row and column of zero padding:
/// at(x, y) is the sum of source values over [0,x) x [0,y).
class IntegralImage {
 public:
  IntegralImage() = default;

  static IntegralImage of(const Image& img);
  /// Table of squared intensities, used for window variance.
  static IntegralImage of_squares(const Image& img);
  /// Table over an arbitrary non-negative count raster of width*height entries.
  static IntegralImage of_counts(int width, int height, std::span<const std::int64_t> values);

  /// Width and height of the source raster (the table is one larger on each axis).
  int width() const { return width_; }
  int height() const { return height_; }

  std::int64_t at(int x, int y) const {
    return table_[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }

  /// Exact sum over the window; throws BoundsError if it leaves the source raster.
  std::int64_t rect_sum(const Window& w) const;

  /// Unchecked variant for inner loops; caller guarantees bounds.
  std::int64_t rect_sum_unchecked(int x0, int y0, int x1, int y1) const {
    const std::size_t stride = static_cast<std::size_t>(width_) + 1;
    return table_[y1 * stride + x1] + table_[y0 * stride + x0] - table_[y0 * stride + x1] -
           table_[y1 * stride + x0];
  }

 private:
  template <typename F>
  static IntegralImage build(int width, int height, F&& value);

  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> table_;
};

}  // namespace robovis
