#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "robovis/imaging/image.hpp"

namespace robovis::features {

/// Difference-of-Gaussians scale-space parameters.
struct ScaleSpaceConfig {
  int octaves = 5;  ///< upper bound; octaves smaller than 16 px are skipped
  int scales_per_octave = 3;
  double initial_sigma = 1.6;
  double contrast_threshold = 0.03;  ///< on |D| with intensities in [0,1]
  double edge_ratio_threshold = 10.0;
  bool upsample = true;  ///< double the base image before the first octave

  void validate() const;
};

struct Keypoint {
  float x = 0.0f;            ///< sub-pixel column, pixel centres at integers
  float y = 0.0f;
  float scale = 0.0f;        ///< blur sigma in input-image pixels
  float orientation = 0.0f;  ///< radians in [0, 2pi), measured from +x towards +y (y down)
  float response = 0.0f;     ///< interpolated |DoG|
};

inline constexpr int kDescriptorSize = 128;
using Descriptor = std::array<float, kDescriptorSize>;

enum DescriptorFlags : std::uint8_t {
  kDescriptorOk = 0,
  kDescriptorLowContrast = 1,    ///< near-zero gradient energy; descriptor set to the uniform vector
  kDescriptorReflectedBorder = 2 ///< support window left the image; border was mirrored
};

/// Keypoints with their descriptors, index-aligned.
struct FeatureSet {
  std::vector<Keypoint> keypoints;
  std::vector<Descriptor> descriptors;
  std::vector<std::uint8_t> flags;

  std::size_t size() const { return keypoints.size(); }
};

/// Detects DoG extrema. Images smaller than 32x32 yield an empty list and a
/// diagnostic in `*diagnostic` (when non-null).
std::vector<Keypoint> detect_keypoints(const Image& img, const ScaleSpaceConfig& cfg = {},
                                       std::string* diagnostic = nullptr);

/// One descriptor per keypoint, computed in the keypoint's normalized frame.
FeatureSet compute_descriptors(const Image& img, std::span<const Keypoint> kps,
                               const ScaleSpaceConfig& cfg = {});

/// detect_keypoints followed by compute_descriptors on a single pyramid.
FeatureSet extract_features(const Image& img, const ScaleSpaceConfig& cfg = {});

/// Unit-normalizes a raw 4x4x8 gradient histogram, clamps entries at 0.2 and
/// renormalizes. `clamped`, when non-null, receives the vector between the two
/// normalizations. Returns false (and leaves `out` untouched) on zero energy.
bool normalize_descriptor(std::span<const double, kDescriptorSize> raw, Descriptor& out,
                          std::array<double, kDescriptorSize>* clamped = nullptr);

/// Euclidean distance between descriptors.
float descriptor_distance(const Descriptor& a, const Descriptor& b);

}  // namespace robovis::features
