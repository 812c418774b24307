#pragma once

#include <map>
#include <optional>
#include <vector>

#include "robovis/imaging/detection.hpp"
#include "robovis/sift/hypothesis.hpp"

namespace robovis::sift {

struct SiftPipelineConfig {
  features::ScaleSpaceConfig scale_space;
  matching::MatchConfig match;
  HoughConfig hough;
  bool use_ransac = true;
  bool use_irls = true;
  bool use_heuristics = true;
  RansacConfig ransac;  ///< min_inliers is taken from hough.min_votes
  IrlsConfig irls;
  HeuristicConfig heuristics;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Named parameter presets for the DoG detector:
/// 3 = 10 votes, IRLS only; 4 = 10 votes, RANSAC+IRLS+heuristics; 5 = as 4 with 5 votes.
SiftPipelineConfig table_preset(int row);

/// Holds the models and their shared descriptor index.
class SiftRecognizer {
 public:
  SiftRecognizer(std::vector<ObjectModel> models, SiftPipelineConfig cfg);

  const SiftPipelineConfig& config() const { return cfg_; }
  const std::vector<ObjectModel>& models() const { return models_; }

  /// Surviving hypotheses for an image, in model order.
  std::vector<Hypothesis> hypotheses(const Image& img) const;
  std::vector<Hypothesis> hypotheses(const features::FeatureSet& query) const;

  /// One detection per surviving hypothesis, box clipped to the image.
  std::vector<Detection> detect(const Image& img, const std::string& frame = {}) const;

 private:
  std::vector<ObjectModel> models_;
  std::map<int, std::size_t> slot_;  ///< model_id -> position in models_
  SiftPipelineConfig cfg_;
  matching::DescriptorSet pool_;
  std::optional<matching::KdForest> index_;
};

std::vector<Detection> detect(const Image& img, std::vector<ObjectModel> models,
                              const SiftPipelineConfig& cfg);

}  // namespace robovis::sift
