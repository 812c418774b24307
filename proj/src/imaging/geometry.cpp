#include "robovis/imaging/geometry.hpp"

#include "robovis/error.hpp"

namespace robovis {

BoundingBox make_box(int x_min, int y_min, int x_max, int y_max) {
  BoundingBox b{x_min, y_min, x_max, y_max};
  if (!b.valid()) throw InvalidArgument("bounding box has non-positive area: " + to_string(b));
  return b;
}

BoundingBox intersect(const BoundingBox& a, const BoundingBox& b) {
  return {std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min), std::min(a.x_max, b.x_max),
          std::min(a.y_max, b.y_max)};
}

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const BoundingBox i = intersect(a, b);
  return i.valid() ? i.area() : 0;
}

BoundingBox clip(const BoundingBox& box, ImageSize dims) {
  return {std::max(box.x_min, 0), std::max(box.y_min, 0), std::min(box.x_max, dims.width),
          std::min(box.y_max, dims.height)};
}

Window::Window(const BoundingBox& box) : box_(box) {
  if (!box.valid()) throw InvalidArgument("window has non-positive area: " + to_string(box));
}

Window::Window(int x_min, int y_min, int x_max, int y_max)
    : Window(BoundingBox{x_min, y_min, x_max, y_max}) {}

double overlap_ratio(const BoundingBox& gt, const BoundingBox& det, bool occluded) {
  const std::int64_t inter = intersection_area(gt, det);
  if (inter == 0) return 0.0;
  if (occluded) return static_cast<double>(inter) / static_cast<double>(gt.area());
  const std::int64_t uni = gt.area() + det.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_string(const BoundingBox& b) {
  return "(" + std::to_string(b.x_min) + "," + std::to_string(b.y_min) + "," +
         std::to_string(b.x_max) + "," + std::to_string(b.y_max) + ")";
}

}  // namespace robovis
