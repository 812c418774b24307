#include "robovis/matching/descriptor_set.hpp"

namespace robovis::matching {

void DescriptorSet::append(const features::FeatureSet& fs, int model_id) {
  for (std::size_t i = 0; i < fs.size(); ++i)
    add(fs.descriptors[i], {model_id, static_cast<int>(i)});
}

float l2_squared(const features::Descriptor& a, const features::Descriptor& b) {
  // Eight fixed lanes: vectorizes without reassociation flags and keeps the
  // summation order identical for every caller.
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < features::kDescriptorSize; i += 8) {
    for (int k = 0; k < 8; ++k) {
      const float d = a[i + k] - b[i + k];
      acc[k] += d * d;
    }
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

}  // namespace robovis::matching
