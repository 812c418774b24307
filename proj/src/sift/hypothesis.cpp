#include "robovis/sift/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include "robovis/error.hpp"
#include "robovis/random.hpp"

namespace robovis::sift {

void ObjectModel::validate() const {
  if (features.size() < 3)
    throw InvalidArgument("model '" + class_name + "' has fewer than 3 keypoints");
  if (width <= 0 || height <= 0) throw InvalidArgument("model dimensions must be positive");
}

ObjectModel make_model(int model_id, std::string class_name, const Image& training,
                       const features::ScaleSpaceConfig& cfg) {
  ObjectModel m{model_id, std::move(class_name), training.width(), training.height(),
                features::extract_features(training, cfg)};
  m.validate();
  return m;
}

void HoughConfig::validate() const {
  if (min_votes < 3) throw InvalidArgument("min_votes must be >= 3");
  if (!(location_bin_fraction > 0) || !(orientation_bin > 0) || !(scale_bin_base > 1))
    throw InvalidArgument("Hough bin sizes must be positive and the scale base > 1");
}

BoundingBox project_model_box(const AffineTransform& t, int w, int h) {
  const Point2 corners[4] = {{0, 0}, {double(w), 0}, {double(w), double(h)}, {0, double(h)}};
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const Point2& c : corners) {
    const Point2 p = t.apply(c);
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  auto to_int = [](double v) {
    return static_cast<int>(std::clamp(v, -1e9, 1e9));
  };
  return {to_int(std::floor(x0)), to_int(std::floor(y0)), to_int(std::ceil(x1)), to_int(std::ceil(y1))};
}

void Hypothesis::update() {
  box = project_model_box(transform, model_width, model_height);
  score = static_cast<int>(support.size());
}

namespace {

using BinKey = std::tuple<int, int, int, int>;  // x, y, orientation, scale

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * std::numbers::pi);
  return a < 0 ? a + 2.0 * std::numbers::pi : a;
}

}  // namespace

std::vector<Hypothesis> hough_cluster(std::span<const matching::Match> matches,
                                      std::span<const features::Keypoint> query_kps,
                                      const ObjectModel& model, const HoughConfig& cfg) {
  cfg.validate();
  const int n_orient = std::max(1, static_cast<int>(std::lround(2.0 * std::numbers::pi / cfg.orientation_bin)));
  const double orient_width = 2.0 * std::numbers::pi / n_orient;
  const double max_dim = std::max(model.width, model.height);
  const double log_base = std::log(cfg.scale_bin_base);
  const Point2 center{model.width / 2.0, model.height / 2.0};

  std::map<BinKey, std::vector<int>> bins;
  for (std::size_t j = 0; j < matches.size(); ++j) {
    const auto& mk = model.features.keypoints.at(matches[j].model_keypoint_index);
    const auto& qk = query_kps[matches[j].query_index];
    const double s = qk.scale / mk.scale;
    const double theta = wrap_angle(qk.orientation - mk.orientation);
    const double cs = std::cos(theta) * s, sn = std::sin(theta) * s;
    const double dx = center.x - mk.x, dy = center.y - mk.y;
    const double px = qk.x + cs * dx - sn * dy, py = qk.y + sn * dx + cs * dy;

    const int s0 = static_cast<int>(std::floor(std::log(s) / log_base - 0.5));
    const int o0 = static_cast<int>(std::floor(theta / orient_width - 0.5));
    for (int sb = s0; sb <= s0 + 1; ++sb) {
      const double loc = cfg.location_bin_fraction * max_dim * std::pow(cfg.scale_bin_base, sb);
      const int x0 = static_cast<int>(std::floor(px / loc - 0.5));
      const int y0 = static_cast<int>(std::floor(py / loc - 0.5));
      for (int ob = o0; ob <= o0 + 1; ++ob) {
        const int o = ((ob % n_orient) + n_orient) % n_orient;
        for (int xb = x0; xb <= x0 + 1; ++xb)
          for (int yb = y0; yb <= y0 + 1; ++yb) {
            auto& v = bins[{xb, yb, o, sb}];
            if (v.empty() || v.back() != static_cast<int>(j)) v.push_back(static_cast<int>(j));
          }
      }
    }
  }

  auto suppressed = [&](const BinKey& key, std::size_t count) {
    const auto [x, y, o, s] = key;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dor = -1; dor <= 1; ++dor)
          for (int ds = -1; ds <= 1; ++ds) {
            const BinKey nb{x + dx, y + dy, ((o + dor) % n_orient + n_orient) % n_orient, s + ds};
            if (nb == key) continue;
            const auto it = bins.find(nb);
            if (it == bins.end()) continue;
            if (it->second.size() > count || (it->second.size() == count && nb < key)) return true;
          }
    return false;
  };

  std::vector<Hypothesis> out;
  std::set<std::vector<int>> seen;
  for (const auto& [key, members] : bins) {
    if (static_cast<int>(members.size()) < cfg.min_votes) continue;
    if (cfg.nms && suppressed(key, members.size())) continue;
    if (!seen.insert(members).second) continue;
    Hypothesis h;
    h.model_id = model.model_id;
    h.model_width = model.width;
    h.model_height = model.height;
    for (int j : members) {
      const auto& m = matches[j];
      const auto& mk = model.features.keypoints[m.model_keypoint_index];
      const auto& qk = query_kps[m.query_index];
      h.support.push_back({{mk.x, mk.y}, {qk.x, qk.y}, m.query_index, m.model_keypoint_index});
    }
    try {
      h.transform = fit_affine_least_squares(h.support);
    } catch (const SingularError&) {
      continue;
    }
    h.update();
    out.push_back(std::move(h));
  }
  return out;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + n / 2));
}

double max_corner_shift(const AffineTransform& a, const AffineTransform& b, double w, double h) {
  const Point2 corners[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  double m = 0;
  for (const Point2& c : corners) {
    const Point2 p = a.apply(c), q = b.apply(c);
    m = std::max(m, std::hypot(p.x - q.x, p.y - q.y));
  }
  return m;
}

}  // namespace

std::optional<Hypothesis> refine_irls(const Hypothesis& hyp, const IrlsConfig& cfg) {
  const std::size_t n = hyp.support.size();
  if (n < 3) return std::nullopt;
  Hypothesis out = hyp;
  out.irls_objective.clear();
  AffineTransform t;
  try {
    t = fit_affine_least_squares(hyp.support);
  } catch (const SingularError&) {
    return std::nullopt;
  }
  if (n == 3) {
    out.transform = t;
    out.irls_objective = {0.0};
    out.update();
    return out;
  }

  std::vector<double> r(n), w(n);
  auto residuals = [&] {
    for (std::size_t i = 0; i < n; ++i) r[i] = reprojection_error(t, hyp.support[i]);
  };
  residuals();

  // Least squares is dragged arbitrarily far by gross outliers, which then hide
  // among inflated inlier residuals. An L1 fit (also by reweighting) gives the
  // bisquare stage a start whose residual scale reflects the inliers.
  for (int it = 0; it < cfg.l1_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::max(r[i], 1e-3);
    AffineTransform next;
    try {
      next = fit_affine_weighted(hyp.support, w);
    } catch (const SingularError&) {
      break;
    }
    const double shift = max_corner_shift(t, next, hyp.model_width, hyp.model_height);
    t = next;
    residuals();
    if (shift < cfg.tol) break;
  }
  const double scale = std::max(1.4826 * median(r), cfg.min_scale);
  const double c = cfg.tuning * scale, c2 = c * c;
  auto objective = [&] {
    double sum = 0;
    for (double ri : r) {
      const double u = std::min(1.0, ri * ri / c2);
      sum += c2 / 6.0 * (1.0 - (1.0 - u) * (1.0 - u) * (1.0 - u));
    }
    return sum;
  };
  auto weights = [&] {
    int nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = r[i] * r[i] / c2;
      w[i] = u < 1.0 ? (1.0 - u) * (1.0 - u) : 0.0;
      nonzero += w[i] > 0;
    }
    return nonzero;
  };

  out.irls_objective.push_back(objective());
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (weights() < 3) return std::nullopt;
    AffineTransform next;
    try {
      next = fit_affine_weighted(hyp.support, w);
    } catch (const SingularError&) {
      return std::nullopt;
    }
    const double shift = max_corner_shift(t, next, hyp.model_width, hyp.model_height);
    t = next;
    residuals();
    out.irls_objective.push_back(objective());
    if (shift < cfg.tol) break;
  }
  if (weights() < 3) return std::nullopt;

  out.transform = t;
  out.support.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0) out.support.push_back(hyp.support[i]);
  out.update();
  return out;
}

std::optional<Hypothesis> verify_ransac(const Hypothesis& hyp, const RansacConfig& cfg,
                                        std::uint64_t seed) {
  const std::size_t n = hyp.support.size();
  if (n < 3) return std::nullopt;
  Rng rng(seed);
  std::vector<std::size_t> best;
  std::vector<std::size_t> inliers;
  for (int it = 0; it < cfg.iterations; ++it) {
    std::size_t idx[3];
    idx[0] = rng.below(n);
    do idx[1] = rng.below(n); while (idx[1] == idx[0]);
    do idx[2] = rng.below(n); while (idx[2] == idx[0] || idx[2] == idx[1]);
    const Correspondence sample[3] = {hyp.support[idx[0]], hyp.support[idx[1]], hyp.support[idx[2]]};
    AffineTransform t;
    try {
      t = fit_affine_least_squares(sample);
    } catch (const SingularError&) {
      continue;
    }
    inliers.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (reprojection_error(t, hyp.support[i]) <= cfg.inlier_px) inliers.push_back(i);
    if (inliers.size() > best.size()) best = inliers;
  }
  if (best.empty() || static_cast<int>(best.size()) < cfg.min_inliers) return std::nullopt;

  Hypothesis out = hyp;
  out.support.clear();
  for (std::size_t i : best) out.support.push_back(hyp.support[i]);
  try {
    out.transform = fit_affine_least_squares(out.support);
  } catch (const SingularError&) {
    return std::nullopt;
  }
  out.update();
  return out;
}

std::vector<Hypothesis> apply_heuristics(std::vector<Hypothesis> hyps, const HeuristicConfig& cfg) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const double sx = hyps[i].transform.x_scale(), sy = hyps[i].transform.y_scale();
    if (std::min(sx, sy) / std::max(sx, sy) >= cfg.min_xy_scale_ratio) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return hyps[a].score > hyps[b].score; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const Point2 ci = hyps[i].center();
    const bool crowded = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      const Point2 ck = hyps[k].center();
      return hyps[k].model_id == hyps[i].model_id &&
             std::hypot(ci.x - ck.x, ci.y - ck.y) < cfg.min_center_separation;
    });
    if (!crowded) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<Hypothesis> out;
  for (std::size_t i : kept) out.push_back(std::move(hyps[i]));
  return out;
}

}  // namespace robovis::sift
