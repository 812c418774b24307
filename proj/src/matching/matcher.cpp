#include "robovis/matching/matcher.hpp"

#include <cmath>

#include "robovis/error.hpp"

namespace robovis::matching {

void MatchConfig::validate() const {
  if (!(distance_ratio > 0.0 && distance_ratio <= 1.0))
    throw InvalidArgument("distance_ratio must lie in (0, 1]");
  if (approx_checks < 0) throw InvalidArgument("approx_checks must be >= 0");
}

namespace {

bool ratio_test(const TwoNearest& nn, const DescriptorSet& db, std::size_t qi, double threshold,
                Match& out) {
  if (nn.best == TwoNearest::kNone || nn.second == TwoNearest::kNone) return false;
  const float d1 = std::sqrt(nn.best_dist), d2 = std::sqrt(nn.second_dist);
  const float ratio = d2 > 0.0f ? d1 / d2 : 1.0f;
  if (ratio > threshold) return false;
  out.query_index = qi;
  out.db_index = nn.best;
  out.model_id = db.owner(nn.best).model_id;
  out.model_keypoint_index = db.owner(nn.best).keypoint_index;
  out.distance = d1;
  out.ratio = ratio;
  return true;
}

}  // namespace

std::vector<Match> match_descriptors(std::span<const features::Descriptor> query,
                                     const KdForest& index, const MatchConfig& cfg) {
  cfg.validate();
  std::vector<Match> out;
  KdForest::Scratch scratch;
  const int checks = cfg.approx ? cfg.approx_checks : kUnlimitedChecks;
  for (std::size_t i = 0; i < query.size(); ++i) {
    Match m;
    if (ratio_test(index.search(query[i], checks, scratch), index.database(), i,
                   cfg.distance_ratio, m))
      out.push_back(m);
  }
  return out;
}

std::vector<Match> match_descriptors(std::span<const features::Descriptor> query,
                                     const DescriptorSet& db, const MatchConfig& cfg) {
  cfg.validate();
  std::vector<Match> out;
  if (db.empty()) return out;
  for (std::size_t i = 0; i < query.size(); ++i) {
    Match m;
    if (ratio_test(brute_force_two_nearest(query[i], db), db, i, cfg.distance_ratio, m))
      out.push_back(m);
  }
  return out;
}

KdForest build_index(DescriptorSet db, std::uint64_t seed) {
  ForestParams p;
  p.seed = seed;
  return KdForest(std::move(db), p);
}

}  // namespace robovis::matching
