#include <algorithm>
#include <cmath>
#include <numbers>

#include "robovis/features/keypoints.hpp"
#include "scale_space.hpp"

namespace robovis::features {
namespace detail {

constexpr double kClamp = 0.2;

namespace {

constexpr int kGrid = 4;
constexpr int kOriBins = 8;
constexpr double kScaleFactor = 3.0;  // spatial bin width in keypoint sigmas
constexpr double kLowContrastEnergy = 1e-4;

int mirror(int i, int n, bool& reflected) {
  if (i >= 0 && i < n) return i;
  reflected = true;
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

}  // namespace

std::uint8_t describe(const Pyramid& pyr, const LocatedKeypoint& lk, Descriptor& out) {
  const ImageF& img = pyr.gauss[lk.octave][lk.layer];
  const int w = img.width(), h = img.height();
  const int cx = static_cast<int>(std::lround(lk.x_oct));
  const int cy = static_cast<int>(std::lround(lk.y_oct));
  const double theta = lk.kp.orientation;
  const double hist_width = kScaleFactor * lk.sigma_oct;
  const double cos_t = std::cos(theta) / hist_width;
  const double sin_t = std::sin(theta) / hist_width;
  int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (kGrid + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::sqrt(double(w) * w + double(h) * h)));
  const double exp_scale = -1.0 / (kGrid * kGrid * 0.5);
  const double bins_per_rad = kOriBins / (2.0 * std::numbers::pi);

  // (kGrid+2)^2 spatial cells x (kOriBins+2) to absorb interpolation spill.
  constexpr int kRowStride = (kGrid + 2) * (kOriBins + 2);
  std::array<double, (kGrid + 2) * kRowStride> hist{};
  bool reflected = false;

  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      // Offset rotated into the keypoint frame, in units of spatial bins.
      const double c_rot = j * cos_t + i * sin_t;
      const double r_rot = -j * sin_t + i * cos_t;
      const double rbin = r_rot + kGrid / 2.0 - 0.5;
      const double cbin = c_rot + kGrid / 2.0 - 0.5;
      if (rbin <= -1 || rbin >= kGrid || cbin <= -1 || cbin >= kGrid) continue;

      const int px = cx + j, py = cy + i;
      const int xm = mirror(px - 1, w, reflected), xp = mirror(px + 1, w, reflected);
      const int ym = mirror(py - 1, h, reflected), yp = mirror(py + 1, h, reflected);
      const int xc = mirror(px, w, reflected), yc = mirror(py, h, reflected);
      const double dx = img.at(xp, yc) - img.at(xm, yc);
      const double dy = img.at(xc, yp) - img.at(xc, ym);
      const double mag = std::sqrt(dx * dx + dy * dy) * std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);
      double rel = std::atan2(dy, dx) - theta;
      rel = std::fmod(rel, 2.0 * std::numbers::pi);
      if (rel < 0) rel += 2.0 * std::numbers::pi;
      double obin = rel * bins_per_rad;

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double fr = rbin - r0, fc = cbin - c0, fo = obin - o0;
      o0 = ((o0 % kOriBins) + kOriBins) % kOriBins;

      const double v_r1 = mag * fr, v_r0 = mag - v_r1;
      const double v_rc11 = v_r1 * fc, v_rc10 = v_r1 - v_rc11;
      const double v_rc01 = v_r0 * fc, v_rc00 = v_r0 - v_rc01;
      const double vals[4] = {v_rc00, v_rc01, v_rc10, v_rc11};
      for (int q = 0; q < 4; ++q) {
        const int rr = r0 + 1 + (q >> 1), cc = c0 + 1 + (q & 1);
        const double v1 = vals[q] * fo, v0 = vals[q] - v1;
        const int base = rr * kRowStride + cc * (kOriBins + 2);
        hist[base + o0] += v0;
        hist[base + o0 + 1] += v1;
      }
    }
  }

  std::array<double, kDescriptorSize> raw{};
  for (int r = 0; r < kGrid; ++r) {
    for (int c = 0; c < kGrid; ++c) {
      const int base = (r + 1) * kRowStride + (c + 1) * (kOriBins + 2);
      // wrap the circular orientation spill
      const double spill = hist[base + kOriBins];
      for (int o = 0; o < kOriBins; ++o)
        raw[(r * kGrid + c) * kOriBins + o] = hist[base + o] + (o == 0 ? spill : 0.0);
    }
  }

  std::uint8_t flags = kDescriptorOk;
  if (reflected) flags |= kDescriptorReflectedBorder;

  double energy = 0.0;
  for (double v : raw) energy += v * v;
  if (std::sqrt(energy) < kLowContrastEnergy || !normalize_descriptor(raw, out)) {
    out.fill(static_cast<float>(1.0 / std::sqrt(double(kDescriptorSize))));
    return flags | kDescriptorLowContrast;
  }
  return flags;
}

}  // namespace detail

bool normalize_descriptor(std::span<const double, kDescriptorSize> raw, Descriptor& out,
                          std::array<double, kDescriptorSize>* clamped) {
  double energy = 0.0;
  for (double v : raw) energy += v * v;
  energy = std::sqrt(energy);
  if (!(energy > 0.0)) return false;
  std::array<double, kDescriptorSize> c{};
  double norm2 = 0.0;
  for (int k = 0; k < kDescriptorSize; ++k) {
    c[k] = std::min(raw[k] / energy, detail::kClamp);
    norm2 += c[k] * c[k];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (int k = 0; k < kDescriptorSize; ++k) out[k] = static_cast<float>(c[k] * inv);
  if (clamped) *clamped = c;
  return true;
}

FeatureSet compute_descriptors(const Image& img, std::span<const Keypoint> kps,
                               const ScaleSpaceConfig& cfg) {
  cfg.validate();
  FeatureSet fs;
  if (kps.empty()) return fs;
  const detail::Pyramid pyr = detail::build_pyramid(img, cfg, false);
  fs.keypoints.assign(kps.begin(), kps.end());
  fs.descriptors.resize(kps.size());
  fs.flags.resize(kps.size());
  for (std::size_t i = 0; i < kps.size(); ++i)
    fs.flags[i] = detail::describe(pyr, detail::locate(pyr, kps[i]), fs.descriptors[i]);
  return fs;
}

FeatureSet extract_features(const Image& img, const ScaleSpaceConfig& cfg) {
  cfg.validate();
  FeatureSet fs;
  if (img.width() < 32 || img.height() < 32) return fs;
  const detail::Pyramid pyr = detail::build_pyramid(img, cfg, true);
  const auto located = detail::find_keypoints(pyr, cfg);
  fs.keypoints.reserve(located.size());
  fs.descriptors.resize(located.size());
  fs.flags.resize(located.size());
  for (std::size_t i = 0; i < located.size(); ++i) {
    fs.keypoints.push_back(located[i].kp);
    fs.flags[i] = detail::describe(pyr, located[i], fs.descriptors[i]);
  }
  return fs;
}

}  // namespace robovis::features
