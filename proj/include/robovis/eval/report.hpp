#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "robovis/eval/metrics.hpp"

namespace robovis::eval {

struct ClassRow {
  std::string name;
  ConfusionCounts counts;
  Metrics metrics;
};

struct TimingStats {
  long frames = 0;
  double total_ms = 0, mean_ms = 0, max_ms = 0;
};

TimingStats timing_stats(std::span<const double> frame_ms);
nlohmann::json to_json(const TimingStats& t);

struct EvalReport {
  std::string method;
  MetricConfig config;
  long frames = 0;
  std::vector<ClassRow> classes;  ///< sorted by name
  ClassRow total;
  std::vector<ConditionRow> conditions;
  std::vector<ConditionRow> sizes;
  OverlapHistogram overlap;

  static EvalReport build(const std::string& method, long frames, std::span<const Detection> dets,
                          std::span<const AnnotationRecord> truth, const MetricConfig& cfg);

  /// Counts and derived values; derived values are recomputed from counts on load.
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);

  std::string table_text() const;
  /// bin_lower,bin_upper,count,cumulative
  std::string overlap_csv() const;
};

}  // namespace robovis::eval
