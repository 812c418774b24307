#pragma once

#include <functional>
#include <string>
#include <vector>

#include "robovis/eval/report.hpp"
#include "robovis/eval/synthetic.hpp"

namespace robovis::eval {

struct Dataset {
  std::vector<Scene> frames;  ///< every frame with its own truth, including empty ones

  std::vector<AnnotationRecord> truth() const;
};

/// Directory layout: frames.txt lists frame file names (relative, one per
/// line), annotations.txt holds the ground truth. Frames are PGM/PPM.
Dataset load_dataset(const std::string& dir);
void save_dataset(const std::string& dir, const Dataset& data);

using Detector = std::function<std::vector<Detection>(const Image&, const std::string& frame)>;

struct BenchmarkResult {
  EvalReport report;
  std::vector<Detection> detections;  ///< in frame order
  std::vector<double> frame_ms;
  TimingStats timing;
};

BenchmarkResult run_benchmark(const Dataset& data, const Detector& detect, const std::string& method,
                              const MetricConfig& cfg);

/// Writes report.json, table.txt, overlap.csv, detections.txt and timing.json.
/// Only timing.json depends on wall-clock time.
void write_benchmark(const std::string& dir, const BenchmarkResult& r);

/// Greedy per-class suppression: a detection is dropped if it overlaps a
/// higher-scored kept one by IoU above `iou`. Ties keep input order.
std::vector<Detection> suppress_overlaps(std::vector<Detection> dets, double iou);

}  // namespace robovis::eval
