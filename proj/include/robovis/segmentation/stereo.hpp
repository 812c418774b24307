#pragma once

#include <vector>

#include "robovis/features/keypoints.hpp"
#include "robovis/imaging/geometry.hpp"

namespace robovis::seg {

struct StereoConfig {
  double epipolar_band = 1.5;     ///< max |y_left - y_right|, px
  double max_scale_ratio = 1.5;   ///< max(s_l/s_r, s_r/s_l)
  double max_orientation_diff = 0.5;  ///< radians
  double max_disparity = 256.0;
  double max_distance = 0.0;      ///< descriptor distance cap; 0 disables

  void validate() const;
};

struct StereoMatch {
  std::size_t left = 0, right = 0;
  double x = 0, y = 0;  ///< left keypoint position
  double disparity = 0;  ///< x_left - x_right, >= 0
  float distance = 0;
};

/// Best-descriptor match per left feature among right features in the
/// row band that satisfy the scale and orientation bounds. Rectified pair assumed.
std::vector<StereoMatch> stereo_match(const features::FeatureSet& left, const features::FeatureSet& right,
                                      const StereoConfig& cfg = {});

struct StereoCalibration {
  double focal = 0;     ///< px
  double baseline = 0;  ///< m
  double cx = 0, cy = 0;

  /// Throws SingularError unless focal and baseline are finite and positive.
  void validate() const;
};

struct CellGrid {
  std::vector<double> cell_sizes = {0.25, 0.5, 1.0};  ///< m
  int min_votes = 5;
  double min_depth = 0.1;  ///< near-plane clamp when projecting cell corners, m
};

struct DepthProposal {
  BoundingBox box;
  double cell_size = 0;
  std::vector<std::size_t> members;  ///< indices into the match list
};

/// Triangulates matches with positive disparity, votes them into cells of each
/// size and projects the corners of every cell with enough votes into the left
/// image. Proposals that fall outside the image are dropped.
std::vector<DepthProposal> depth_grid_proposals(const std::vector<StereoMatch>& matches,
                                                const StereoCalibration& calib, const CellGrid& grid,
                                                ImageSize dims);

/// Indices of features within `radius` px of any member match of a proposal.
std::vector<std::size_t> features_near(const DepthProposal& p, const std::vector<StereoMatch>& matches,
                                       const features::FeatureSet& left, double radius);

}  // namespace robovis::seg
