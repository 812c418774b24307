#include "robovis/segmentation/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "robovis/error.hpp"

namespace robovis::seg {

void StereoConfig::validate() const {
  if (!(epipolar_band >= 0) || !(max_scale_ratio >= 1) || !(max_orientation_diff >= 0) ||
      !(max_disparity >= 0) || !(max_distance >= 0))
    throw InvalidArgument("invalid stereo matching bounds");
}

std::vector<StereoMatch> stereo_match(const features::FeatureSet& left, const features::FeatureSet& right,
                                      const StereoConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> by_row(right.size());
  for (std::size_t i = 0; i < by_row.size(); ++i) by_row[i] = i;
  std::sort(by_row.begin(), by_row.end(), [&](std::size_t a, std::size_t b) {
    return right.keypoints[a].y < right.keypoints[b].y || (right.keypoints[a].y == right.keypoints[b].y && a < b);
  });

  std::vector<StereoMatch> out;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const auto& l = left.keypoints[i];
    auto it = std::lower_bound(by_row.begin(), by_row.end(), l.y - cfg.epipolar_band,
                               [&](std::size_t j, double v) { return right.keypoints[j].y < v; });
    std::size_t best = by_row.size();
    float best_d = 0;
    for (; it != by_row.end() && right.keypoints[*it].y <= l.y + cfg.epipolar_band; ++it) {
      const std::size_t j = *it;
      const auto& r = right.keypoints[j];
      const double disp = double(l.x) - r.x;
      if (disp < 0 || disp > cfg.max_disparity) continue;
      if (std::max(l.scale / r.scale, r.scale / l.scale) > cfg.max_scale_ratio) continue;
      double dor = std::fmod(std::abs(double(l.orientation) - r.orientation), 2 * std::numbers::pi);
      dor = std::min(dor, 2 * std::numbers::pi - dor);
      if (dor > cfg.max_orientation_diff) continue;
      const float d = features::descriptor_distance(left.descriptors[i], right.descriptors[j]);
      if (best == by_row.size() || d < best_d || (d == best_d && j < best)) best = j, best_d = d;
    }
    if (best == by_row.size()) continue;
    if (cfg.max_distance > 0 && best_d > cfg.max_distance) continue;
    out.push_back({i, best, l.x, l.y, double(l.x) - right.keypoints[best].x, best_d});
  }
  return out;
}

void StereoCalibration::validate() const {
  if (!(focal > 0) || !(baseline > 0) || !std::isfinite(focal) || !std::isfinite(baseline))
    throw SingularError("stereo calibration needs a positive focal length and baseline");
}

std::vector<DepthProposal> depth_grid_proposals(const std::vector<StereoMatch>& matches,
                                                const StereoCalibration& calib, const CellGrid& grid,
                                                ImageSize dims) {
  calib.validate();
  if (grid.min_votes < 1) throw InvalidArgument("cell min_votes must be >= 1");
  struct P3 {
    double x, y, z;
  };
  std::vector<P3> pts(matches.size());
  std::vector<bool> ok(matches.size(), false);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (!(matches[i].disparity > 0)) continue;
    const double z = calib.focal * calib.baseline / matches[i].disparity;
    pts[i] = {(matches[i].x - calib.cx) * z / calib.focal, (matches[i].y - calib.cy) * z / calib.focal, z};
    ok[i] = true;
  }

  std::vector<DepthProposal> out;
  for (double s : grid.cell_sizes) {
    if (!(s > 0)) throw InvalidArgument("cell sizes must be positive");
    std::map<std::tuple<long, long, long>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (ok[i])
        cells[{static_cast<long>(std::floor(pts[i].x / s)), static_cast<long>(std::floor(pts[i].y / s)),
               static_cast<long>(std::floor(pts[i].z / s))}]
            .push_back(i);
    for (auto& [key, members] : cells) {
      if (static_cast<int>(members.size()) < grid.min_votes) continue;
      const auto [cx, cy, cz] = key;
      double u0 = 1e300, v0 = 1e300, u1 = -1e300, v1 = -1e300;
      for (int corner = 0; corner < 8; ++corner) {
        const double X = (cx + (corner & 1)) * s, Y = (cy + ((corner >> 1) & 1)) * s;
        const double Z = std::max((cz + ((corner >> 2) & 1)) * s, grid.min_depth);
        const double u = calib.focal * X / Z + calib.cx, v = calib.focal * Y / Z + calib.cy;
        u0 = std::min(u0, u), u1 = std::max(u1, u);
        v0 = std::min(v0, v), v1 = std::max(v1, v);
      }
      auto to_int = [](double v) { return static_cast<int>(std::clamp(v, -1e9, 1e9)); };
      const BoundingBox box = clip({to_int(std::floor(u0)), to_int(std::floor(v0)), to_int(std::ceil(u1)),
                                    to_int(std::ceil(v1))},
                                   dims);
      if (!box.valid()) continue;
      out.push_back({box, s, std::move(members)});
    }
  }
  return out;
}

std::vector<std::size_t> features_near(const DepthProposal& p, const std::vector<StereoMatch>& matches,
                                       const features::FeatureSet& left, double radius) {
  std::vector<std::size_t> out;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < left.size(); ++i) {
    const auto& k = left.keypoints[i];
    for (std::size_t m : p.members) {
      const double dx = k.x - matches[m].x, dy = k.y - matches[m].y;
      if (dx * dx + dy * dy <= r2) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

}  // namespace robovis::seg
