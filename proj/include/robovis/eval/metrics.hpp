#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "robovis/eval/annotations.hpp"

namespace robovis::eval {

enum class OverlapMode {
  Strict,           ///< intersection over union for every instance
  OccludedRelaxed,  ///< intersection over ground-truth area for occluded instances
  AllRelaxed,       ///< intersection over ground-truth area for every instance
};

std::string to_string(OverlapMode m);
OverlapMode parse_overlap_mode(const std::string& s);

struct MetricConfig {
  double beta = 1.0;
  double overlap = 0.5;
  OverlapMode mode = OverlapMode::OccludedRelaxed;

  void validate() const;
};

/// Overlap of a detection with a ground-truth instance under the configured mode.
double match_overlap(const AnnotationRecord& gt, const BoundingBox& det, OverlapMode mode);

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MatchResult {
  std::vector<long> detection_match;  ///< per detection: matched ground-truth index or -1
  std::vector<long> truth_match;      ///< per ground truth: matched detection index or -1
  std::vector<double> truth_overlap;  ///< criterion overlap of the match (0 if unmatched)
  std::vector<double> truth_iou;      ///< intersection over union of the match (0 if unmatched)
  std::map<std::string, ConfusionCounts> per_class;
  ConfusionCounts total;
};

/// Detections are taken by descending score (ties by index). Each claims the
/// unmatched same-frame, same-class instance of highest overlap meeting the
/// threshold; when all qualifying instances are taken, an augmenting path may
/// move an earlier detection to another qualifying instance. Earlier
/// detections never lose their match. Leftover detections are false
/// positives, leftover instances false negatives.
MatchResult match_detections(std::span<const Detection> dets, std::span<const AnnotationRecord> truth,
                             const MetricConfig& cfg);

struct Metrics {
  double precision = 0, recall = 0, f = 0;
  bool precision_defined = false, recall_defined = false, f_defined = false;
};

double precision(long tp, long fp);
double recall(long tp, long fn);
/// Harmonic mean of precision and recall.
double f1_measure(double p, double r);
/// Weighted form: (1+β²)pr / (β²p + r).
double f_beta(double p, double r, double beta);
/// Undefined ratios (0/0) are reported as 0 with the flag cleared.
Metrics compute_metrics(const ConfusionCounts& c, double beta = 1.0);

struct ConditionRow {
  std::string name;
  ConditionFlags flags = 0;
  long instances = 0, detected = 0;
  double recall = 0;
  bool defined = false;
};

/// Recall per exact flag combination: normal, blur, occluded, illumination,
/// blur+occluded, occluded+illumination, blur+illumination and all three.
/// The rows partition the ground truth.
std::vector<ConditionRow> condition_breakdown(const MatchResult& m, std::span<const AnnotationRecord> truth);

/// Recall for instances below / at-or-above an area threshold.
std::vector<ConditionRow> size_breakdown(const MatchResult& m, std::span<const AnnotationRecord> truth,
                                         long area_threshold = 5000);

struct OverlapHistogram {
  std::array<long, 10> counts{};       ///< bin k holds IoU in [k/10, (k+1)/10), the last bin includes 1
  std::array<double, 10> cumulative{};  ///< fraction of true positives with IoU below the bin's upper edge
  long total = 0;
  bool empty() const { return total == 0; }
  /// Fraction of true positives with IoU strictly above t.
  double fraction_above(double t) const;
  std::vector<double> values;  ///< the raw IoUs, for fraction_above
};

OverlapHistogram overlap_histogram(const MatchResult& m);

}  // namespace robovis::eval
