#include "robovis/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "robovis/error.hpp"

namespace robovis::eval {

std::string to_string(OverlapMode m) {
  switch (m) {
    case OverlapMode::Strict: return "strict";
    case OverlapMode::OccludedRelaxed: return "occluded-relaxed";
    case OverlapMode::AllRelaxed: return "relaxed";
  }
  return "?";
}

OverlapMode parse_overlap_mode(const std::string& s) {
  if (s == "strict") return OverlapMode::Strict;
  if (s == "occluded-relaxed") return OverlapMode::OccludedRelaxed;
  if (s == "relaxed") return OverlapMode::AllRelaxed;
  throw InvalidArgument("unknown overlap mode '" + s + "'");
}

void MetricConfig::validate() const {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  if (!(overlap > 0 && overlap <= 1)) throw InvalidArgument("overlap threshold must be in (0,1]");
}

double match_overlap(const AnnotationRecord& gt, const BoundingBox& det, OverlapMode mode) {
  const bool relaxed = mode == OverlapMode::AllRelaxed || (mode == OverlapMode::OccludedRelaxed && gt.occluded());
  return overlap_ratio(gt.box, det, relaxed);
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const AnnotationRecord> truth,
                             const MetricConfig& cfg) {
  cfg.validate();
  const std::size_t nd = dets.size(), ng = truth.size();
  MatchResult r;
  r.detection_match.assign(nd, -1);
  r.truth_match.assign(ng, -1);
  r.truth_overlap.assign(ng, 0.0);
  r.truth_iou.assign(ng, 0.0);

  // Qualifying instances per detection, best overlap first.
  std::vector<std::vector<std::pair<double, long>>> cand(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    for (std::size_t g = 0; g < ng; ++g) {
      if (truth[g].frame != dets[d].frame || truth[g].class_name != dets[d].class_name) continue;
      const double ov = match_overlap(truth[g], dets[d].box, cfg.mode);
      if (ov >= cfg.overlap) cand[d].push_back({ov, static_cast<long>(g)});
    }
    std::stable_sort(cand[d].begin(), cand[d].end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  }

  std::vector<std::size_t> order(nd);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<char> seen(ng);
  // Kuhn augmenting search; recursion depth is bounded by the number of detections.
  auto augment = [&](auto&& self, std::size_t d) -> bool {
    for (const auto& [ov, g] : cand[d]) {
      if (r.truth_match[g] < 0) {
        r.truth_match[g] = static_cast<long>(d);
        r.detection_match[d] = g;
        return true;
      }
    }
    for (const auto& [ov, g] : cand[d]) {
      if (seen[g]) continue;
      seen[g] = 1;
      const auto other = static_cast<std::size_t>(r.truth_match[g]);
      if (self(self, other)) {
        r.truth_match[g] = static_cast<long>(d);
        r.detection_match[d] = g;
        return true;
      }
    }
    return false;
  };
  for (std::size_t d : order) {
    if (cand[d].empty()) continue;
    std::fill(seen.begin(), seen.end(), 0);
    augment(augment, d);
  }

  for (std::size_t g = 0; g < ng; ++g) {
    ConfusionCounts& c = r.per_class[truth[g].class_name];
    if (r.truth_match[g] >= 0) {
      const BoundingBox& box = dets[static_cast<std::size_t>(r.truth_match[g])].box;
      r.truth_overlap[g] = match_overlap(truth[g], box, cfg.mode);
      r.truth_iou[g] = overlap_ratio(truth[g].box, box, false);
      ++c.tp;
    } else {
      ++c.fn;
    }
  }
  for (std::size_t d = 0; d < nd; ++d)
    if (r.detection_match[d] < 0) ++r.per_class[dets[d].class_name].fp;
  for (const auto& [name, c] : r.per_class) r.total += c;
  return r;
}

double precision(long tp, long fp) { return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
double recall(long tp, long fn) { return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }

double f1_measure(double p, double r) { return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0; }

double f_beta(double p, double r, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * p + r;
  return den > 0 ? (1.0 + b2) * p * r / den : 0.0;
}

Metrics compute_metrics(const ConfusionCounts& c, double beta) {
  Metrics m;
  m.precision_defined = c.tp + c.fp > 0;
  m.recall_defined = c.tp + c.fn > 0;
  m.precision = precision(c.tp, c.fp);
  m.recall = recall(c.tp, c.fn);
  m.f = beta == 1.0 ? f1_measure(m.precision, m.recall) : f_beta(m.precision, m.recall, beta);
  m.f_defined = m.precision_defined && m.recall_defined && m.precision + m.recall > 0;
  return m;
}

namespace {

ConditionRow finish(ConditionRow row) {
  row.defined = row.instances > 0;
  row.recall = row.defined ? static_cast<double>(row.detected) / static_cast<double>(row.instances) : 0.0;
  return row;
}

}  // namespace

std::vector<ConditionRow> condition_breakdown(const MatchResult& m, std::span<const AnnotationRecord> truth) {
  std::vector<ConditionRow> rows = {
      {"normal", kNormal},
      {"blur", kBlur},
      {"occluded", kOccluded},
      {"illumination", kIllumination},
      {"blur+occluded", kBlur | kOccluded},
      {"occluded+illumination", kOccluded | kIllumination},
      {"blur+illumination", kBlur | kIllumination},
      {"blur+occluded+illumination", kBlur | kOccluded | kIllumination},
  };
  for (std::size_t g = 0; g < truth.size(); ++g)
    for (ConditionRow& row : rows)
      if (row.flags == truth[g].flags) {
        ++row.instances;
        row.detected += m.truth_match[g] >= 0;
      }
  for (ConditionRow& row : rows) row = finish(row);
  return rows;
}

std::vector<ConditionRow> size_breakdown(const MatchResult& m, std::span<const AnnotationRecord> truth,
                                         long area_threshold) {
  std::vector<ConditionRow> rows = {{"area<" + std::to_string(area_threshold), 0},
                                    {"area>=" + std::to_string(area_threshold), 0}};
  for (std::size_t g = 0; g < truth.size(); ++g) {
    ConditionRow& row = rows[truth[g].box.area() >= area_threshold ? 1 : 0];
    ++row.instances;
    row.detected += m.truth_match[g] >= 0;
  }
  for (ConditionRow& row : rows) row = finish(row);
  return rows;
}

double OverlapHistogram::fraction_above(double t) const {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(), [t](double v) { return v > t; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

OverlapHistogram overlap_histogram(const MatchResult& m) {
  OverlapHistogram h;
  for (std::size_t g = 0; g < m.truth_match.size(); ++g) {
    if (m.truth_match[g] < 0) continue;
    const double v = m.truth_iou[g];
    h.values.push_back(v);
    ++h.counts[static_cast<std::size_t>(std::clamp(static_cast<int>(v * 10.0), 0, 9))];
    ++h.total;
  }
  long run = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    run += h.counts[k];
    h.cumulative[k] = h.total ? static_cast<double>(run) / static_cast<double>(h.total) : 0.0;
  }
  return h;
}

}  // namespace robovis::eval
