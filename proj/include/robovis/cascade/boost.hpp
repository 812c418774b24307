#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "robovis/cascade/haar.hpp"
#include "robovis/imaging/image.hpp"

namespace robovis::cascade {

/// Fires (votes positive) iff polarity · response < polarity · threshold.
struct Stump {
  HaarFeature feature;
  double threshold = 0.0;
  int polarity = 1;
  double alpha = 0.0;

  bool fires(float response) const {
    return polarity > 0 ? double(response) < threshold : double(response) > threshold;
  }
};

struct Stage {
  std::vector<Stump> stumps;
  double threshold = 0.0;  ///< window passes iff Σ α·fired ≥ threshold
  double detection_rate = 0.0;
  double false_positive_rate = 0.0;
  std::vector<double> stump_errors;   ///< weighted error of each stump when selected
  std::vector<double> error_bound;    ///< Π 2·sqrt(ε(1−ε)) after each stump
};

/// One base-size training window with its integral table and sigma.
struct Sample {
  IntegralImage ii;
  double sigma = 1.0;
};

Sample make_sample(const Image& patch);
float response(const HaarFeature& f, const Sample& s);

/// Responses of a feature pool over a sample set, with per-feature sort orders.
class ResponseTable {
 public:
  ResponseTable(std::span<const HaarFeature> pool, std::span<const Sample* const> samples);

  std::size_t feature_count() const { return features_.size(); }
  std::size_t sample_count() const { return n_; }
  const HaarFeature& feature(std::size_t f) const { return features_[f]; }
  float value(std::size_t f, std::size_t s) const { return values_[f * n_ + s]; }
  /// Sample indices of feature f in ascending response order (ties by index).
  std::span<const std::uint32_t> order(std::size_t f) const {
    return std::span<const std::uint32_t>(order_).subspan(f * n_, n_);
  }

 private:
  std::vector<HaarFeature> features_;
  std::size_t n_ = 0;
  std::vector<float> values_;
  std::vector<std::uint32_t> order_;
};

struct StumpChoice {
  Stump stump;  ///< alpha left at 0
  double error = 0.5;
  std::size_t feature_index = 0;
};

/// Exhaustive (feature, threshold, polarity) search minimizing weighted error.
/// labels are 1 for positives and 0 for negatives. Throws InvalidArgument when
/// only one class is present.
StumpChoice train_stump(const ResponseTable& table, std::span<const std::uint8_t> labels,
                        std::span<const double> weights);

struct BoostConfig {
  double min_detection_rate = 0.995;      ///< per stage
  double max_false_positive_rate = 0.25;  ///< per stage
  int max_stumps = 50;                    ///< per stage
  int max_stages = 5;
  int negatives_per_stage = 1000;
  int feature_pool = 4000;                ///< random subset of all placements
  long long max_mining_attempts = 5'000'000;
  int window_w = 24, window_h = 24;
  std::uint64_t seed = 0;

  void validate() const;
};

/// AdaBoost with the stage threshold lowered to keep the detection-rate target;
/// stops when the stage false-positive rate reaches its target, when the stump
/// budget is spent, or when no stump beats chance.
Stage train_stage(std::span<const Sample* const> positives, std::span<const Sample* const> negatives,
                  std::span<const HaarFeature> pool, const BoostConfig& cfg);

}  // namespace robovis::cascade
