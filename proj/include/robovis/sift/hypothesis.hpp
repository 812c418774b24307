#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robovis/features/keypoints.hpp"
#include "robovis/imaging/geometry.hpp"
#include "robovis/imaging/image.hpp"
#include "robovis/matching/matcher.hpp"
#include "robovis/sift/affine.hpp"

namespace robovis::sift {

/// One training image worth of features. Model coordinates are training-image pixels.
struct ObjectModel {
  int model_id = 0;
  std::string class_name;
  int width = 0, height = 0;
  features::FeatureSet features;

  /// Throws InvalidArgument with fewer than 3 keypoints.
  void validate() const;
};

ObjectModel make_model(int model_id, std::string class_name, const Image& training,
                       const features::ScaleSpaceConfig& cfg = {});

struct HoughConfig {
  double location_bin_fraction = 0.25;  ///< of max model dimension, times predicted scale
  double orientation_bin = std::numbers::pi / 6.0;
  double scale_bin_base = 2.0;
  int min_votes = 3;
  bool nms = true;

  void validate() const;
};

struct Hypothesis {
  int model_id = 0;
  int model_width = 0, model_height = 0;
  AffineTransform transform;
  std::vector<Correspondence> support;
  BoundingBox box;  ///< projected model outline, axis-aligned, unclipped
  int score = 0;    ///< support size after the last verification step
  std::vector<double> irls_objective;  ///< robust loss after each IRLS iteration

  Point2 center() const { return transform.apply({model_width / 2.0, model_height / 2.0}); }
  /// Recomputes `box` and `score` from the transform and support.
  void update();
};

/// Full projected box of the model outline under `t`.
BoundingBox project_model_box(const AffineTransform& t, int model_width, int model_height);

/// Pose clustering. `matches` must all refer to `model`; `query_kps` are the
/// test-image keypoints the matches index into. Each hypothesis carries a
/// least-squares transform; bins whose support is degenerate are dropped.
std::vector<Hypothesis> hough_cluster(std::span<const matching::Match> matches,
                                      std::span<const features::Keypoint> query_kps,
                                      const ObjectModel& model, const HoughConfig& cfg);

struct IrlsConfig {
  int max_iters = 20;
  double tol = 1e-3;         ///< max corner displacement between iterations, px
  double tuning = 4.685;     ///< Tukey bisquare constant, in units of the residual scale
  double min_scale = 0.25;   ///< floor on the residual scale, px
  int l1_iters = 30;         ///< reweighted L1 warm-start iterations; 0 starts from least squares
};

/// Tukey-bisquare IRLS, warm-started from a reweighted L1 fit. The residual scale
/// is taken from the warm start and held fixed, so the recorded robust loss never
/// increases. Support is pruned to the
/// correspondences with non-zero final weight. Returns nullopt when fewer than
/// three keep a weight. A support of exactly three is returned as its exact fit.
std::optional<Hypothesis> refine_irls(const Hypothesis& hyp, const IrlsConfig& cfg = {});

struct RansacConfig {
  int iterations = 200;
  double inlier_px = 3.0;
  int min_inliers = 3;
};

/// Best three-point model by inlier count, refit on its consensus set. Rejects
/// (nullopt) when the best consensus is smaller than min_inliers.
std::optional<Hypothesis> verify_ransac(const Hypothesis& hyp, const RansacConfig& cfg,
                                        std::uint64_t seed);

struct HeuristicConfig {
  double min_center_separation = 20.0;  ///< px, between same-model hypotheses
  double min_xy_scale_ratio = 0.2;
};

/// Drops anisotropic transforms, then keeps only the highest-scoring hypothesis
/// among same-model ones whose projected centers are closer than the separation.
std::vector<Hypothesis> apply_heuristics(std::vector<Hypothesis> hyps,
                                         const HeuristicConfig& cfg = {});

}  // namespace robovis::sift
