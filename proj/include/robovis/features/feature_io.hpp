#pragma once

#include <filesystem>
#include <iosfwd>

#include "robovis/features/keypoints.hpp"

namespace robovis::features {

// Binary feature dump, little-endian:
//   char[4] "RVFT" | u32 version (=1) | u32 count | u32 dimension (=128)
//   count x { f32 x, f32 y, f32 scale, f32 orientation, f32[128] descriptor }
inline constexpr std::uint32_t kFeatureDumpVersion = 1;

void write_features(std::ostream& out, const FeatureSet& fs);
FeatureSet read_features(std::istream& in);
void save_features(const std::filesystem::path& path, const FeatureSet& fs);
FeatureSet load_features(const std::filesystem::path& path);

/// One line per keypoint: x y scale orientation d0 ... d127 (%.9g).
void write_features_text(std::ostream& out, const FeatureSet& fs);

}  // namespace robovis::features
