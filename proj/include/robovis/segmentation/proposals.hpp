#pragma once

#include <span>
#include <vector>

#include "robovis/imaging/geometry.hpp"
#include "robovis/segmentation/canny.hpp"

namespace robovis::seg {

struct ProposalConfig {
  int tolerance = 12;  ///< admitted intensity difference from the seed, both directions
  int min_area = 900;
  std::vector<double> multipliers = {0.75, 1.0, 1.25, 1.5, 2.0};
  double canny_low = 40.0, canny_high = 100.0;

  void validate() const;
};

struct Point {
  int x = 0, y = 0;
};

struct Region {
  int label = 0;  ///< value of this region in Segmentation::labels (>= 1)
  Point seed;
  int area = 0;
  BoundingBox box;
};

struct Segmentation {
  int width = 0, height = 0;
  std::vector<int> labels;  ///< 0 for edge pixels and discarded small regions
  std::vector<Region> regions;

  int label_at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Flood fill bounded by edges and a two-sided tolerance around each seed.
/// Seeds are taken in raster order from pixels not yet consumed; regions
/// smaller than min_area stay consumed but are not reported.
Segmentation floodcanny(const Image& img, const EdgeMap& edges, const ProposalConfig& cfg);

/// canny + floodcanny with the thresholds in cfg.
Segmentation floodcanny(const Image& img, const ProposalConfig& cfg = {});

/// One window per multiplier, centred on the region's box centre and clipped.
std::vector<BoundingBox> region_windows(const Region& region, ImageSize dims, const ProposalConfig& cfg);

/// Region windows of every region, in region order.
std::vector<BoundingBox> proposal_windows(const Segmentation& seg, const ProposalConfig& cfg);

/// Raster of w x h windows at `step` for each shape that fits the image.
std::vector<BoundingBox> sliding_windows(ImageSize dims, int step, std::span<const ImageSize> shapes);

/// Labels as a viewable 8-bit image (0 stays black, regions get distinct grey levels).
Image label_image(const Segmentation& seg);

}  // namespace robovis::seg
