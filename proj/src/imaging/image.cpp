#include "robovis/imaging/image.hpp"

#include <cmath>
#include <numeric>

#include "robovis/error.hpp"

namespace robovis {

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw InvalidArgument("pixel buffer size does not match width*height");
}

double Image::mean() const {
  if (data_.empty()) return 0.0;
  const std::uint64_t total = std::accumulate(data_.begin(), data_.end(), std::uint64_t{0});
  return static_cast<double>(total) / static_cast<double>(data_.size());
}

ImageF::ImageF(int width, int height, float fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

ImageF to_float(const Image& img) {
  ImageF out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
  return out;
}

Image to_u8(const ImageF& img) {
  Image out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const float v = std::round(src[i]);
    dst[i] = static_cast<std::uint8_t>(v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v));
  }
  return out;
}

Image luminance_from_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw InvalidArgument("RGB buffer size does not match dimensions");
  Image out(width, height);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    // Integer Rec. 601: 0.299 R + 0.587 G + 0.114 B, rounded.
    const unsigned y = 299u * rgb[3 * i] + 587u * rgb[3 * i + 1] + 114u * rgb[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>((y + 500u) / 1000u);
  }
  return out;
}

}  // namespace robovis
