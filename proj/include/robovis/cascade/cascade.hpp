#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "robovis/cascade/boost.hpp"
#include "robovis/imaging/detection.hpp"

namespace robovis::cascade {

struct Cascade {
  std::string class_name;
  int window_w = 24, window_h = 24;
  std::vector<Stage> stages;

  /// Stage-by-stage evaluation with early exit; `margin` receives the last
  /// evaluated stage's Σα − threshold.
  bool accepts(const IntegralImage& ii, const IntegralImage& sq, int x, int y, double* margin = nullptr,
               int stage_limit = -1) const;
  bool accepts(const Sample& s, double* margin = nullptr, int stage_limit = -1) const;

  /// Versioned text model; numbers printed with round-trip precision.
  void save(std::ostream& out) const;
  static Cascade load(std::istream& in);
};

struct StageLog {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  long long mining_attempts = 0;
  double detection_rate = 0;
  double false_positive_rate = 0;
};

struct TrainingLog {
  std::vector<StageLog> stages;
  std::vector<std::string> warnings;
};

/// Grey-level pyramid shared by negative mining and scanning: level k is the
/// image shrunk by factor^k, pre-blurred against aliasing.
struct PyramidLevel {
  double scale = 1.0;
  Image image;
  IntegralImage ii, sq;
};
std::vector<PyramidLevel> build_pyramid(const Image& img, double factor, int min_w, int min_h);

/// Positive patches are window-sized. Negatives are mined as random windows of
/// the pool images' pyramids that the cascade built so far still accepts.
Cascade train_cascade(std::span<const Image> positives, std::span<const Image> negative_pool,
                      const BoostConfig& cfg, std::string class_name, TrainingLog* log = nullptr);

struct ScanConfig {
  double scale_factor = 1.25;
  int step = 2;  ///< px at each pyramid level
  int min_neighbors = 2;
  double group_overlap = 0.5;

  void validate() const;
};

struct RawHit {
  BoundingBox box;
  double margin = 0;
};

std::vector<RawHit> scan_cascade(const Image& img, const Cascade& c, const ScanConfig& cfg,
                                 std::size_t* windows_evaluated = nullptr);

/// Union of hits overlapping by IoU ≥ overlap; groups with at least
/// min_neighbors + 1 members become one box (mean origin and mean side).
std::vector<RawHit> group_hits(const std::vector<RawHit>& hits, int min_neighbors, double overlap);

std::vector<Detection> detect_cascade(const Image& img, const Cascade& c, const ScanConfig& cfg,
                                      const std::string& frame = {});

/// n perturbed copies: rotation ≤ 15°, scale 0.9–1.1, shear ≤ 0.1 about the
/// centre, then brightness ±10 and contrast 0.9–1.1 jitter.
std::vector<Image> synth_views(const Image& img, int n, std::uint64_t seed);

}  // namespace robovis::cascade
