#pragma once

#include <span>
#include <vector>

#include "robovis/features/keypoints.hpp"

namespace robovis::matching {

/// Which model keypoint a database descriptor came from.
struct OwnerTag {
  int model_id = 0;
  int keypoint_index = 0;
  friend bool operator==(const OwnerTag&, const OwnerTag&) = default;
};

/// A flat pool of 128-d descriptors with one owner tag each.
class DescriptorSet {
 public:
  static constexpr int kDimension = features::kDescriptorSize;

  void add(const features::Descriptor& d, OwnerTag owner) {
    data_.push_back(d);
    owners_.push_back(owner);
  }
  /// Appends every descriptor of `fs`, tagged (model_id, keypoint index).
  void append(const features::FeatureSet& fs, int model_id);

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const features::Descriptor& operator[](std::size_t i) const { return data_[i]; }
  const OwnerTag& owner(std::size_t i) const { return owners_[i]; }
  std::span<const features::Descriptor> descriptors() const { return data_; }
  std::span<const OwnerTag> owners() const { return owners_; }

 private:
  std::vector<features::Descriptor> data_;
  std::vector<OwnerTag> owners_;
};

/// Squared Euclidean distance; the single kernel shared by every search path.
float l2_squared(const features::Descriptor& a, const features::Descriptor& b);

}  // namespace robovis::matching
