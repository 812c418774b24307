#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robovis/imaging/detection.hpp"
#include "robovis/vtree/signature.hpp"
#include "robovis/vtree/word_integrals.hpp"

namespace robovis::vtree {

/// Tree, weights, inverted file and image labels: everything needed to classify.
struct VocabModel {
  VocabularyTree tree;
  InvertedFile index;
  std::vector<std::string> labels;  ///< per database image

  /// Quantizes each training image, computes weights and indexes leaf-only L2 signatures.
  static VocabModel build(VocabularyTree tree, std::span<const features::FeatureSet> images,
                          std::vector<std::string> labels);

  Signature signature(const WordCounts& words) const;
  KnnResult classify(const WordCounts& words, int k_nn) const;

  void save(std::ostream& out) const;
  static VocabModel load(std::istream& in);
};

inline const std::string kBackgroundLabel = "background";

struct WindowClassifierConfig {
  int k_nn = 5;
  int min_features = 3;  ///< windows with fewer features are skipped
};

/// Classifies each proposal window from the image's word integrals. Windows
/// whose kNN label is the background label emit nothing.
std::vector<Detection> classify_windows(const VocabModel& model, const features::FeatureSet& image,
                                        int width, int height, std::span<const BoundingBox> windows,
                                        const WindowClassifierConfig& cfg, const std::string& frame = {});

}  // namespace robovis::vtree
