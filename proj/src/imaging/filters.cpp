#include "robovis/imaging/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "robovis/error.hpp"

namespace robovis {
namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<float> gaussian_kernel_half(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(radius + 1);
  double total = 0.0;
  for (int i = 0; i <= radius; ++i) {
    k[i] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += (i == 0 ? 1.0 : 2.0) * k[i];
  }
  std::vector<float> out(radius + 1);
  for (int i = 0; i <= radius; ++i) out[i] = static_cast<float>(k[i] / total);
  return out;
}

double reflect_coord(double v, int n) {
  // Mirror about the outer pixel centres so the sampled value is continuous.
  if (n == 1) return 0.0;
  const double period = 2.0 * (n - 1);
  v = std::fmod(v, period);
  if (v < 0) v += period;
  return v > n - 1 ? period - v : v;
}

float sample_bilinear(const Image& src, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(src.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(src.height() - 1));
  const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, src.width() - 1), y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = src.at(x0, y0) * (1 - fx) + src.at(x1, y0) * fx;
  const double bot = src.at(x0, y1) * (1 - fx) + src.at(x1, y1) * fx;
  return static_cast<float>(top * (1 - fy) + bot * fy);
}

AffineMatrix invert(const AffineMatrix& m) {
  const double det = m[0] * m[4] - m[1] * m[3];
  if (std::abs(det) < 1e-12) throw SingularError("affine warp is singular");
  const double a = m[4] / det, b = -m[1] / det, c = -m[3] / det, d = m[0] / det;
  return {a, b, -(a * m[2] + b * m[5]), c, d, -(c * m[2] + d * m[5])};
}

}  // namespace

ImageF gaussian_blur(const ImageF& src, double sigma) {
  if (sigma <= 0.0) return src;
  const auto kernel = gaussian_kernel_half(sigma);
  const int radius = static_cast<int>(kernel.size()) - 1;
  const int w = src.width(), h = src.height();

  ImageF tmp(w, h);
  std::vector<float> padded(static_cast<std::size_t>(w) + 2 * radius);
  for (int y = 0; y < h; ++y) {
    const float* in = src.row_ptr(y);
    for (int i = -radius; i < w + radius; ++i) padded[i + radius] = in[reflect101(i, w)];
    float* out = tmp.row_ptr(y);
    for (int x = 0; x < w; ++x) {
      const float* c = &padded[x + radius];
      float acc = kernel[0] * c[0];
      for (int k = 1; k <= radius; ++k) acc += kernel[k] * (c[-k] + c[k]);
      out[x] = acc;
    }
  }

  ImageF dst(w, h);
  for (int y = 0; y < h; ++y) {
    float* out = dst.row_ptr(y);
    const float* center = tmp.row_ptr(y);
    for (int x = 0; x < w; ++x) out[x] = kernel[0] * center[x];
    for (int k = 1; k <= radius; ++k) {
      const float* up = tmp.row_ptr(reflect101(y - k, h));
      const float* down = tmp.row_ptr(reflect101(y + k, h));
      const float wk = kernel[k];
      for (int x = 0; x < w; ++x) out[x] += wk * (up[x] + down[x]);
    }
  }
  return dst;
}

Image gaussian_blur(const Image& src, double sigma) {
  ImageF f(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) f.at(x, y) = src.at(x, y);
  return to_u8(gaussian_blur(f, sigma));
}

ImageF resize_bilinear(const ImageF& src, int width, int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("resize target must be positive");
  ImageF dst(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  std::vector<int> x0s(width), x1s(width);
  std::vector<float> fxs(width);
  for (int x = 0; x < width; ++x) {
    const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width() - 1));
    x0s[x] = static_cast<int>(fx);
    x1s[x] = std::min(x0s[x] + 1, src.width() - 1);
    fxs[x] = static_cast<float>(fx - x0s[x]);
  }
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, src.height() - 1);
    const float wy = static_cast<float>(fy - y0);
    const float* r0 = src.row_ptr(y0);
    const float* r1 = src.row_ptr(y1);
    float* out = dst.row_ptr(y);
    for (int x = 0; x < width; ++x) {
      const float top = r0[x0s[x]] + fxs[x] * (r0[x1s[x]] - r0[x0s[x]]);
      const float bot = r1[x0s[x]] + fxs[x] * (r1[x1s[x]] - r1[x0s[x]]);
      out[x] = top + wy * (bot - top);
    }
  }
  return dst;
}

Image resize_bilinear(const Image& src, int width, int height) {
  ImageF f(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x) f.at(x, y) = src.at(x, y);
  return to_u8(resize_bilinear(f, width, height));
}

ImageF downsample_half(const ImageF& src) {
  const int w = std::max(1, src.width() / 2), h = std::max(1, src.height() / 2);
  ImageF dst(w, h);
  for (int y = 0; y < h; ++y) {
    const float* r0 = src.row_ptr(std::min(2 * y, src.height() - 1));
    const float* r1 = src.row_ptr(std::min(2 * y + 1, src.height() - 1));
    float* out = dst.row_ptr(y);
    for (int x = 0; x < w; ++x) {
      const int a = std::min(2 * x, src.width() - 1), b = std::min(2 * x + 1, src.width() - 1);
      out[x] = 0.25f * ((r0[a] + r0[b]) + (r1[a] + r1[b]));
    }
  }
  return dst;
}

Image rotate90_cw(const Image& src) {
  const int w = src.width(), h = src.height();
  Image dst(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) dst.at(h - 1 - y, x) = src.at(x, y);
  return dst;
}

std::vector<bool> warp_affine_into(const Image& src, const AffineMatrix& src_to_dst, Image& dst) {
  const AffineMatrix inv = invert(src_to_dst);
  std::vector<bool> covered(static_cast<std::size_t>(dst.width()) * dst.height(), false);
  const double wlim = src.width() - 0.5, hlim = src.height() - 0.5;
  for (int y = 0; y < dst.height(); ++y) {
    for (int x = 0; x < dst.width(); ++x) {
      const double sx = inv[0] * x + inv[1] * y + inv[2];
      const double sy = inv[3] * x + inv[4] * y + inv[5];
      if (sx < -0.5 || sy < -0.5 || sx >= wlim || sy >= hlim) continue;
      const float v = sample_bilinear(src, sx, sy);
      dst.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      covered[static_cast<std::size_t>(y) * dst.width() + x] = true;
    }
  }
  return covered;
}

Image warp_affine_reflect(const Image& src, const AffineMatrix& src_to_dst, int width, int height) {
  const AffineMatrix inv = invert(src_to_dst);
  Image dst(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double sx = reflect_coord(inv[0] * x + inv[1] * y + inv[2], src.width());
      const double sy = reflect_coord(inv[3] * x + inv[4] * y + inv[5], src.height());
      const float v = sample_bilinear(src, sx, sy);
      dst.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return dst;
}

}  // namespace robovis
