#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "robovis/imaging/image.hpp"

namespace robovis {

/// Axis-aligned box, inclusive min / exclusive max, origin top-left.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  bool contains(const BoundingBox& other) const {
    return other.x_min >= x_min && other.y_min >= y_min && other.x_max <= x_max &&
           other.y_max <= y_max;
  }
  bool inside(ImageSize dims) const {
    return x_min >= 0 && y_min >= 0 && x_max <= dims.width && y_max <= dims.height;
  }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Throws InvalidArgument unless x_min < x_max and y_min < y_max.
BoundingBox make_box(int x_min, int y_min, int x_max, int y_max);

/// Intersection; may be invalid (empty) when the boxes are disjoint.
BoundingBox intersect(const BoundingBox& a, const BoundingBox& b);
std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Clips to [0,w)x[0,h). Result may be invalid if the box lies fully outside.
BoundingBox clip(const BoundingBox& box, ImageSize dims);

struct Corner {
  int x = 0;
  int y = 0;
};

/// A box addressed through its four integral-image corners.
class Window {
 public:
  explicit Window(const BoundingBox& box);
  Window(int x_min, int y_min, int x_max, int y_max);

  const BoundingBox& box() const { return box_; }
  Corner top_left() const { return {box_.x_min, box_.y_min}; }
  Corner top_right() const { return {box_.x_max, box_.y_min}; }
  Corner bottom_left() const { return {box_.x_min, box_.y_max}; }
  Corner bottom_right() const { return {box_.x_max, box_.y_max}; }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  BoundingBox box_;
};

/// Pascal ratio |gt∩det| / |gt∪det|, or |gt∩det| / |gt| for occluded ground truth.
double overlap_ratio(const BoundingBox& gt, const BoundingBox& det, bool occluded);

std::string to_string(const BoundingBox& box);

}  // namespace robovis
