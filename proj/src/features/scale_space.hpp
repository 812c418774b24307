#pragma once

// Internal: Gaussian/DoG pyramid shared by detection and description.

#include <vector>

#include "robovis/features/keypoints.hpp"
#include "robovis/imaging/image.hpp"

namespace robovis::features::detail {

struct Pyramid {
  int scales = 3;
  double sigma0 = 1.6;
  double base_factor = 1.0;  ///< input pixels per base-octave pixel (0.5 when upsampled)
  std::vector<std::vector<ImageF>> gauss;  ///< [octave][scales + 3]
  std::vector<std::vector<ImageF>> dog;    ///< [octave][scales + 2]

  int octaves() const { return static_cast<int>(gauss.size()); }
  double octave_factor(int o) const { return base_factor * static_cast<double>(1 << o); }
};

Pyramid build_pyramid(const Image& img, const ScaleSpaceConfig& cfg, bool with_dog);

/// Keypoint plus the pyramid coordinates it was found at.
struct LocatedKeypoint {
  Keypoint kp;
  int octave = 0;
  int layer = 0;
  float x_oct = 0.0f;
  float y_oct = 0.0f;
  float sigma_oct = 0.0f;
};

LocatedKeypoint locate(const Pyramid& pyr, const Keypoint& kp);

std::vector<LocatedKeypoint> find_keypoints(const Pyramid& pyr, const ScaleSpaceConfig& cfg);

/// Descriptor for one located keypoint; returns DescriptorFlags.
std::uint8_t describe(const Pyramid& pyr, const LocatedKeypoint& lk, Descriptor& out);

}  // namespace robovis::features::detail
