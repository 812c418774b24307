#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace robovis {

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// 8-bit grayscale raster, row-major, origin top-left.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  ImageSize size() const { return {width_, height_}; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }
  std::span<const std::uint8_t> row(int y) const {
    return std::span<const std::uint8_t>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  double mean() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Floating-point view used by the filtering code. Values are unconstrained.
class ImageF {
 public:
  ImageF() = default;
  ImageF(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  float* row_ptr(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const float* row_ptr(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

  std::span<const float> pixels() const { return data_; }
  std::span<float> pixels() { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Intensities scaled to [0, 1].
ImageF to_float(const Image& img);

/// Rounds and saturates a float raster holding values on the 0..255 scale.
Image to_u8(const ImageF& img);

/// Rec. 601 luma from interleaved RGB triples.
Image luminance_from_rgb(int width, int height, std::span<const std::uint8_t> rgb);

}  // namespace robovis
