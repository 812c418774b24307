#include "robovis/imaging/integral_image.hpp"

#include "robovis/error.hpp"

namespace robovis {

template <typename F>
IntegralImage IntegralImage::build(int width, int height, F&& value) {
  IntegralImage ii;
  ii.width_ = width;
  ii.height_ = height;
  const std::size_t stride = static_cast<std::size_t>(width) + 1;
  ii.table_.assign(stride * (static_cast<std::size_t>(height) + 1), 0);
  for (int y = 0; y < height; ++y) {
    std::int64_t row_sum = 0;
    const std::int64_t* above = &ii.table_[y * stride];
    std::int64_t* cur = &ii.table_[(y + 1) * stride];
    for (int x = 0; x < width; ++x) {
      row_sum += value(x, y);
      cur[x + 1] = above[x + 1] + row_sum;
    }
  }
  return ii;
}

IntegralImage IntegralImage::of(const Image& img) {
  return build(img.width(), img.height(),
               [&](int x, int y) { return static_cast<std::int64_t>(img.at(x, y)); });
}

IntegralImage IntegralImage::of_squares(const Image& img) {
  return build(img.width(), img.height(), [&](int x, int y) {
    const std::int64_t v = img.at(x, y);
    return v * v;
  });
}

IntegralImage IntegralImage::of_counts(int width, int height, std::span<const std::int64_t> values) {
  if (width <= 0 || height <= 0) throw InvalidArgument("count raster dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("count raster size does not match dimensions");
  return build(width, height, [&](int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  });
}

std::int64_t IntegralImage::rect_sum(const Window& w) const {
  const BoundingBox& b = w.box();
  if (!b.inside({width_, height_}))
    throw BoundsError("window " + to_string(b) + " outside " + std::to_string(width_) + "x" +
                      std::to_string(height_) + " raster");
  // H = I(br) + I(tl) - I(tr) - I(bl)
  const Corner br = w.bottom_right(), tl = w.top_left(), tr = w.top_right(), bl = w.bottom_left();
  return at(br.x, br.y) + at(tl.x, tl.y) - at(tr.x, tr.y) - at(bl.x, bl.y);
}

}  // namespace robovis
