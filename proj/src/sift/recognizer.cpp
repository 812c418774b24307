#include "robovis/sift/recognizer.hpp"

#include <map>

#include "robovis/error.hpp"
#include "robovis/random.hpp"

namespace robovis::sift {

void SiftPipelineConfig::validate() const {
  scale_space.validate();
  match.validate();
  hough.validate();
  if (ransac.iterations < 1 || !(ransac.inlier_px > 0))
    throw InvalidArgument("RANSAC needs >= 1 iteration and a positive inlier threshold");
  if (irls.max_iters < 1 || !(irls.tol > 0)) throw InvalidArgument("IRLS needs >= 1 iteration and tol > 0");
}

SiftPipelineConfig table_preset(int row) {
  SiftPipelineConfig cfg;
  cfg.match.distance_ratio = 0.8;
  cfg.match.approx = true;
  cfg.hough.nms = true;
  cfg.use_irls = true;
  switch (row) {
    case 3:
      cfg.hough.min_votes = 10;
      cfg.use_ransac = false;
      cfg.use_heuristics = false;
      break;
    case 4:
      cfg.hough.min_votes = 10;
      cfg.use_ransac = true;
      cfg.use_heuristics = true;
      break;
    case 5:
      cfg.hough.min_votes = 5;
      cfg.use_ransac = true;
      cfg.use_heuristics = true;
      break;
    default:
      throw InvalidArgument("only the DoG rows 3, 4 and 5 have presets");
  }
  return cfg;
}

SiftRecognizer::SiftRecognizer(std::vector<ObjectModel> models, SiftPipelineConfig cfg)
    : models_(std::move(models)), cfg_(cfg) {
  cfg_.validate();
  if (models_.empty()) throw InvalidArgument("recognizer needs at least one model");
  for (std::size_t i = 0; i < models_.size(); ++i) {
    models_[i].validate();
    if (!slot_.emplace(models_[i].model_id, i).second)
      throw InvalidArgument("duplicate model_id " + std::to_string(models_[i].model_id));
    pool_.append(models_[i].features, static_cast<int>(i));
  }
  if (cfg_.match.approx && pool_.size() >= 2) index_ = matching::build_index(pool_, cfg_.seed);
}

std::vector<Hypothesis> SiftRecognizer::hypotheses(const Image& img) const {
  return hypotheses(features::extract_features(img, cfg_.scale_space));
}

std::vector<Hypothesis> SiftRecognizer::hypotheses(const features::FeatureSet& query) const {
  const auto matches = index_ ? matching::match_descriptors(query.descriptors, *index_, cfg_.match)
                              : matching::match_descriptors(query.descriptors, pool_, cfg_.match);
  // Owner tags carry the position in models_, not the user-facing model_id.
  std::map<int, std::vector<matching::Match>> by_model;
  for (const auto& m : matches) by_model[m.model_id].push_back(m);

  std::vector<Hypothesis> out;
  for (auto& [slot, ms] : by_model) {
    const ObjectModel& model = models_[slot];
    auto hyps = hough_cluster(ms, query.keypoints, model, cfg_.hough);
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      std::optional<Hypothesis> cur = std::move(hyps[h]);
      if (cfg_.use_ransac) {
        RansacConfig rc = cfg_.ransac;
        rc.min_inliers = cfg_.hough.min_votes;
        cur = verify_ransac(*cur, rc, derive_seed(derive_seed(cfg_.seed, slot), h));
      }
      if (cur && cfg_.use_irls) cur = refine_irls(*cur, cfg_.irls);
      if (cur) out.push_back(std::move(*cur));
    }
  }
  if (cfg_.use_heuristics) out = apply_heuristics(std::move(out), cfg_.heuristics);
  return out;
}

std::vector<Detection> SiftRecognizer::detect(const Image& img, const std::string& frame) const {
  std::vector<Detection> out;
  const ImageSize dims{img.width(), img.height()};
  for (const Hypothesis& h : hypotheses(img)) {
    const BoundingBox box = clip(h.box, dims);
    if (!box.valid()) continue;
    out.push_back({frame, models_[slot_.at(h.model_id)].class_name, box, static_cast<double>(h.score)});
  }
  return out;
}

std::vector<Detection> detect(const Image& img, std::vector<ObjectModel> models,
                              const SiftPipelineConfig& cfg) {
  return SiftRecognizer(std::move(models), cfg).detect(img);
}

}  // namespace robovis::sift
