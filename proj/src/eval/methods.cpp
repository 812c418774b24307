#include "robovis/eval/methods.hpp"

#include <algorithm>

#include "robovis/error.hpp"

namespace robovis::eval {

Detector sift_detector(const sift::SiftRecognizer& rec) {
  return [&rec](const Image& img, const std::string& frame) { return rec.detect(img, frame); };
}

std::vector<BoundingBox> vtree_windows(const Image& img, const VtreeDetectorConfig& cfg) {
  if (cfg.proposals == ProposalSource::Floodcanny)
    return seg::proposal_windows(seg::floodcanny(img, cfg.proposal), cfg.proposal);
  return seg::sliding_windows(img.size(), cfg.sliding_step, cfg.sliding_shapes);
}

Detector vtree_detector(const vtree::VocabModel& model, const VtreeDetectorConfig& cfg,
                        std::atomic<std::size_t>* windows_evaluated) {
  return [&model, cfg, windows_evaluated](const Image& img, const std::string& frame) {
    const std::vector<BoundingBox> windows = vtree_windows(img, cfg);
    if (windows_evaluated) *windows_evaluated += windows.size();
    const features::FeatureSet fs = features::extract_features(img, cfg.scale_space);
    return suppress_overlaps(
        vtree::classify_windows(model, fs, img.width(), img.height(), windows, cfg.classifier, frame), cfg.nms_iou);
  };
}

vtree::VocabModel train_vocab_model(std::span<const ObjectImage> objects, std::span<const Image> backgrounds,
                                    const VtreeTrainingConfig& cfg) {
  if (objects.empty()) throw InvalidArgument("no object images");
  std::vector<features::FeatureSet> images;
  std::vector<std::string> labels;
  std::uint64_t tag = 0;
  for (const ObjectImage& o : objects) {
    images.push_back(features::extract_features(o.image, cfg.scale_space));
    labels.push_back(o.class_name);
    if (cfg.views_per_object > 0)
      for (const Image& v : cascade::synth_views(o.image, cfg.views_per_object, derive_seed(cfg.seed, tag++))) {
        images.push_back(features::extract_features(v, cfg.scale_space));
        labels.push_back(o.class_name);
      }
  }
  Rng rng(derive_seed(cfg.seed, 1u << 20));
  for (const Image& bg : backgrounds) {
    const int cw = std::min(cfg.crop_size, bg.width()), ch = std::min(cfg.crop_size, bg.height());
    for (int i = 0; i < cfg.background_crops; ++i) {
      const int x0 = rng.range(0, bg.width() - cw), y0 = rng.range(0, bg.height() - ch);
      Image crop(cw, ch);
      for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x) crop.at(x, y) = bg.at(x0 + x, y0 + y);
      images.push_back(features::extract_features(crop, cfg.scale_space));
      labels.push_back(vtree::kBackgroundLabel);
    }
  }
  std::vector<features::Descriptor> all;
  for (const auto& fs : images) all.insert(all.end(), fs.descriptors.begin(), fs.descriptors.end());
  vtree::TreeConfig tc = cfg.tree;
  tc.seed = derive_seed(cfg.seed, 2u << 20);
  return vtree::VocabModel::build(vtree::VocabularyTree::train(all, tc), images, std::move(labels));
}

Detector cascade_detector(std::span<const cascade::Cascade> cascades, const cascade::ScanConfig& cfg) {
  cfg.validate();
  return [cascades, cfg](const Image& img, const std::string& frame) {
    std::vector<Detection> out;
    for (const cascade::Cascade& c : cascades) {
      auto d = cascade::detect_cascade(img, c, cfg, frame);
      out.insert(out.end(), d.begin(), d.end());
    }
    return out;
  };
}

}  // namespace robovis::eval
