#pragma once

#include <atomic>
#include <span>
#include <vector>

#include "robovis/cascade/cascade.hpp"
#include "robovis/eval/benchmark.hpp"
#include "robovis/segmentation/proposals.hpp"
#include "robovis/sift/recognizer.hpp"
#include "robovis/vtree/detector.hpp"

namespace robovis::eval {

/// The recognizer must outlive the returned detector.
Detector sift_detector(const sift::SiftRecognizer& rec);

enum class ProposalSource { Floodcanny, Sliding };

struct VtreeDetectorConfig {
  ProposalSource proposals = ProposalSource::Floodcanny;
  seg::ProposalConfig proposal;
  int sliding_step = 16;
  std::vector<ImageSize> sliding_shapes = {{96, 96}, {128, 96}, {160, 120}, {192, 144}, {240, 180}};
  vtree::WindowClassifierConfig classifier;
  features::ScaleSpaceConfig scale_space;
  double nms_iou = 0.3;
};

/// Candidate windows for one image under the configured proposal source.
std::vector<BoundingBox> vtree_windows(const Image& img, const VtreeDetectorConfig& cfg);

/// `windows_evaluated`, when given, accumulates the number of classified windows.
Detector vtree_detector(const vtree::VocabModel& model, const VtreeDetectorConfig& cfg,
                        std::atomic<std::size_t>* windows_evaluated = nullptr);

struct VtreeTrainingConfig {
  vtree::TreeConfig tree = vtree::TreeConfig::detection_preset();
  features::ScaleSpaceConfig scale_space;
  int views_per_object = 10;  ///< synthetic views added per object image
  int background_crops = 40;  ///< per background image
  int crop_size = 128;
  std::uint64_t seed = 0;
};

/// Database of object views (labelled by class) and background crops
/// (labelled background); the tree is trained on all their descriptors.
vtree::VocabModel train_vocab_model(std::span<const ObjectImage> objects, std::span<const Image> backgrounds,
                                    const VtreeTrainingConfig& cfg);

/// One cascade per class; the cascades must outlive the returned detector.
Detector cascade_detector(std::span<const cascade::Cascade> cascades, const cascade::ScanConfig& cfg);

}  // namespace robovis::eval
