#include "robovis/cascade/boost.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robovis/error.hpp"

namespace robovis::cascade {

Sample make_sample(const Image& patch) {
  Sample s;
  s.ii = IntegralImage::of(patch);
  const IntegralImage sq = IntegralImage::of_squares(patch);
  s.sigma = window_sigma(s.ii, sq, 0, 0, patch.width(), patch.height());
  return s;
}

float response(const HaarFeature& f, const Sample& s) {
  return normalize_response(haar_raw_unchecked(f, s.ii, 0, 0), s.sigma, f.cell_w * f.cell_h);
}

ResponseTable::ResponseTable(std::span<const HaarFeature> pool, std::span<const Sample* const> samples)
    : features_(pool.begin(), pool.end()), n_(samples.size()) {
  values_.resize(features_.size() * n_);
  order_.resize(features_.size() * n_);
  for (std::size_t f = 0; f < features_.size(); ++f) {
    float* v = values_.data() + f * n_;
    for (std::size_t s = 0; s < n_; ++s) v[s] = response(features_[f], *samples[s]);
    std::uint32_t* o = order_.data() + f * n_;
    std::iota(o, o + n_, 0u);
    std::sort(o, o + n_, [v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b] || (v[a] == v[b] && a < b); });
  }
}

StumpChoice train_stump(const ResponseTable& table, std::span<const std::uint8_t> labels,
                        std::span<const double> weights) {
  const std::size_t n = table.sample_count();
  if (labels.size() != n || weights.size() != n) throw InvalidArgument("labels and weights must match the samples");
  if (table.feature_count() == 0) throw InvalidArgument("empty feature pool");
  double wp = 0, wn = 0;
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i]) {
      wp += weights[i];
      has_pos = true;
    } else {
      wn += weights[i];
      has_neg = true;
    }
  }
  if (!has_pos || !has_neg) throw InvalidArgument("stump training needs both classes");

  StumpChoice best;
  best.error = std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t f, double threshold, int polarity, double err) {
    if (err < best.error) {
      best.error = err;
      best.feature_index = f;
      best.stump = Stump{table.feature(f), threshold, polarity, 0.0};
    }
  };
  for (std::size_t f = 0; f < table.feature_count(); ++f) {
    const auto order = table.order(f);
    const float lowest = table.value(f, order[0]);
    // Threshold below every response: polarity +1 fires on nothing, -1 on everything.
    consider(f, double(lowest) - 1.0, 1, wp);
    consider(f, double(lowest) - 1.0, -1, wn);
    double below_p = 0, below_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t s = order[i];
      (labels[s] ? below_p : below_n) += weights[s];
      const float v = table.value(f, s);
      const bool last = i + 1 == n;
      if (!last && table.value(f, order[i + 1]) == v) continue;
      const double threshold = last ? double(v) + 1.0 : 0.5 * (double(v) + double(table.value(f, order[i + 1])));
      consider(f, threshold, 1, below_n + (wp - below_p));
      consider(f, threshold, -1, below_p + (wn - below_n));
    }
  }
  return best;
}

void BoostConfig::validate() const {
  if (!(min_detection_rate > 0 && min_detection_rate < 1)) throw InvalidArgument("min_detection_rate must be in (0,1)");
  if (!(max_false_positive_rate > 0 && max_false_positive_rate < 1))
    throw InvalidArgument("max_false_positive_rate must be in (0,1)");
  if (max_stumps < 1 || max_stages < 1) throw InvalidArgument("stump and stage budgets must be positive");
  if (negatives_per_stage < 1 || feature_pool < 1) throw InvalidArgument("pool sizes must be positive");
  if (window_w < 2 || window_h < 2) throw InvalidArgument("window too small");
  if (max_mining_attempts < negatives_per_stage) throw InvalidArgument("max_mining_attempts below negatives_per_stage");
}

Stage train_stage(std::span<const Sample* const> positives, std::span<const Sample* const> negatives,
                  std::span<const HaarFeature> pool, const BoostConfig& cfg) {
  if (positives.empty() || negatives.empty()) throw InvalidArgument("stage training needs both classes");
  const std::size_t np = positives.size(), nn = negatives.size(), n = np + nn;
  std::vector<const Sample*> all(positives.begin(), positives.end());
  all.insert(all.end(), negatives.begin(), negatives.end());
  const ResponseTable table(pool, all);

  std::vector<std::uint8_t> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + np, 1);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = labels[i] ? 0.5 / np : 0.5 / nn;

  Stage stage;
  std::vector<double> score(n, 0.0);
  std::vector<double> pos_sorted(np);
  const std::size_t keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(cfg.min_detection_rate * static_cast<double>(np) - 1e-9)), 1, np);
  double bound = 1.0;

  for (int t = 0; t < cfg.max_stumps; ++t) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
    StumpChoice c = train_stump(table, labels, weights);
    if (c.error >= 0.5) break;
    const double eps = std::max(c.error, 1e-10);
    c.stump.alpha = 0.5 * std::log((1.0 - eps) / eps);
    const double up = std::exp(c.stump.alpha), down = std::exp(-c.stump.alpha);
    for (std::size_t i = 0; i < n; ++i) {
      const bool fired = c.stump.fires(table.value(c.feature_index, i));
      if (fired) score[i] += c.stump.alpha;
      weights[i] *= fired == bool(labels[i]) ? down : up;
    }
    bound *= 2.0 * std::sqrt(eps * (1.0 - eps));
    stage.stumps.push_back(c.stump);
    stage.stump_errors.push_back(c.error);
    stage.error_bound.push_back(bound);

    // Largest threshold that still passes `keep` positives.
    std::copy(score.begin(), score.begin() + np, pos_sorted.begin());
    std::nth_element(pos_sorted.begin(), pos_sorted.begin() + (keep - 1), pos_sorted.end(), std::greater<>());
    stage.threshold = pos_sorted[keep - 1];
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < np; ++i) tp += score[i] >= stage.threshold;
    for (std::size_t i = np; i < n; ++i) fp += score[i] >= stage.threshold;
    stage.detection_rate = static_cast<double>(tp) / np;
    stage.false_positive_rate = static_cast<double>(fp) / nn;
    if (stage.false_positive_rate <= cfg.max_false_positive_rate) break;
  }
  if (stage.stumps.empty()) throw Error("no weak classifier beats chance on this stage's samples");
  return stage;
}

}  // namespace robovis::cascade
