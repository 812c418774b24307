#pragma once

#include <array>
#include <vector>

#include "robovis/imaging/image.hpp"

namespace robovis {

/// Separable Gaussian blur with mirrored (reflect-101) borders.
ImageF gaussian_blur(const ImageF& src, double sigma);
Image gaussian_blur(const Image& src, double sigma);

/// Bilinear resize with pixel-centre alignment: dst x maps to src (x+0.5)*sx-0.5.
ImageF resize_bilinear(const ImageF& src, int width, int height);
Image resize_bilinear(const Image& src, int width, int height);

/// Halves each axis by averaging 2x2 blocks (odd trailing row/column dropped).
ImageF downsample_half(const ImageF& src);

/// Rotates 90 degrees clockwise: pixel (x, y) moves to (h-1-y, x).
Image rotate90_cw(const Image& src);

/// 2x3 row-major affine map taking source coordinates to destination coordinates.
using AffineMatrix = std::array<double, 6>;

/// Renders src into a width x height canvas through the forward map `src_to_dst`,
/// bilinear-sampling the inverse. Pixels whose preimage falls outside src are
/// left untouched in `dst` and reported false in the returned coverage mask.
std::vector<bool> warp_affine_into(const Image& src, const AffineMatrix& src_to_dst, Image& dst);

/// Warp into a fresh canvas; uncovered pixels are filled by mirrored sampling.
Image warp_affine_reflect(const Image& src, const AffineMatrix& src_to_dst, int width, int height);

}  // namespace robovis
