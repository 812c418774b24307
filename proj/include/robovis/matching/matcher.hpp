#pragma once

#include <span>
#include <vector>

#include "robovis/matching/descriptor_set.hpp"
#include "robovis/matching/kd_forest.hpp"

namespace robovis::matching {

struct MatchConfig {
  double distance_ratio = 0.8;
  bool approx = true;
  int approx_checks = 128;  ///< leaf-visit budget; kUnlimitedChecks for exact

  void validate() const;
};

struct Match {
  std::size_t query_index = 0;
  int model_id = 0;
  int model_keypoint_index = 0;
  std::size_t db_index = 0;
  float distance = 0.0f;  ///< Euclidean, not squared
  float ratio = 0.0f;     ///< best / second-best distance
};

/// Ratio test against the forest. Uses the search budget when cfg.approx,
/// otherwise an exhaustive scan of the forest's database.
std::vector<Match> match_descriptors(std::span<const features::Descriptor> query,
                                     const KdForest& index, const MatchConfig& cfg);

/// Ratio test by exhaustive scan (cfg.approx is ignored).
std::vector<Match> match_descriptors(std::span<const features::Descriptor> query,
                                     const DescriptorSet& db, const MatchConfig& cfg);

/// Builds the forest used for approximate matching. Requires >= 2 descriptors.
KdForest build_index(DescriptorSet db, std::uint64_t seed);

}  // namespace robovis::matching
