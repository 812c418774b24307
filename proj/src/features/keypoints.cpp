#include "robovis/features/keypoints.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robovis/error.hpp"
#include "robovis/imaging/filters.hpp"
#include "scale_space.hpp"

namespace robovis::features {

void ScaleSpaceConfig::validate() const {
  if (octaves < 1) throw InvalidArgument("octaves must be >= 1");
  if (scales_per_octave < 2) throw InvalidArgument("scales_per_octave must be >= 2");
  if (initial_sigma <= 0.0) throw InvalidArgument("initial_sigma must be > 0");
  if (contrast_threshold <= 0.0 || edge_ratio_threshold <= 0.0)
    throw InvalidArgument("thresholds must be > 0");
}

namespace detail {

Pyramid build_pyramid(const Image& img, const ScaleSpaceConfig& cfg, bool with_dog) {
  Pyramid pyr;
  pyr.scales = cfg.scales_per_octave;
  pyr.sigma0 = cfg.initial_sigma;
  pyr.base_factor = cfg.upsample ? 0.5 : 1.0;

  ImageF base = to_float(img);
  double assumed_blur = 0.5;
  if (cfg.upsample) {
    base = resize_bilinear(base, img.width() * 2, img.height() * 2);
    assumed_blur = 1.0;
  }
  const double sig_diff =
      std::sqrt(std::max(cfg.initial_sigma * cfg.initial_sigma - assumed_blur * assumed_blur, 0.01));
  base = gaussian_blur(base, sig_diff);

  int n_oct = 0;
  for (int w = base.width(), h = base.height(); n_oct < cfg.octaves && std::min(w, h) >= 16;
       w /= 2, h /= 2)
    ++n_oct;

  const int S = cfg.scales_per_octave;
  std::vector<double> increments(S + 3, 0.0);
  const double k = std::pow(2.0, 1.0 / S);
  for (int i = 1; i < S + 3; ++i) {
    const double prev = cfg.initial_sigma * std::pow(k, i - 1);
    const double total = prev * k;
    increments[i] = std::sqrt(total * total - prev * prev);
  }

  pyr.gauss.resize(n_oct);
  for (int o = 0; o < n_oct; ++o) {
    auto& layers = pyr.gauss[o];
    layers.reserve(S + 3);
    layers.push_back(o == 0 ? base : downsample_half(pyr.gauss[o - 1][S]));
    for (int i = 1; i < S + 3; ++i) layers.push_back(gaussian_blur(layers.back(), increments[i]));
  }

  if (with_dog) {
    pyr.dog.resize(n_oct);
    for (int o = 0; o < n_oct; ++o) {
      for (int i = 0; i < S + 2; ++i) {
        const ImageF& a = pyr.gauss[o][i];
        const ImageF& b = pyr.gauss[o][i + 1];
        ImageF d(a.width(), a.height());
        auto pa = a.pixels();
        auto pb = b.pixels();
        auto pd = d.pixels();
        for (std::size_t p = 0; p < pd.size(); ++p) pd[p] = pb[p] - pa[p];
        pyr.dog[o].push_back(std::move(d));
      }
    }
  }
  return pyr;
}

LocatedKeypoint locate(const Pyramid& pyr, const Keypoint& kp) {
  LocatedKeypoint lk;
  lk.kp = kp;
  const int S = pyr.scales;
  const double t = S * std::log2(std::max(1e-6, kp.scale / (pyr.sigma0 * pyr.base_factor)));
  lk.octave = std::clamp(static_cast<int>(std::floor(t / S)), 0, pyr.octaves() - 1);
  lk.layer = std::clamp(static_cast<int>(std::lround(t - lk.octave * S)), 0, S + 2);
  const double f = pyr.octave_factor(lk.octave);
  lk.x_oct = static_cast<float>((kp.x + 0.5) / f - 0.5);
  lk.y_oct = static_cast<float>((kp.y + 0.5) / f - 0.5);
  lk.sigma_oct = static_cast<float>(kp.scale / f);
  return lk;
}

namespace {

constexpr int kBorder = 5;
constexpr int kMaxInterpSteps = 5;
constexpr int kOriBins = 36;
constexpr double kOriPeakRatio = 0.8;
constexpr double kOriSigmaFactor = 1.5;

bool is_extremum(const std::vector<ImageF>& dog, int layer, int x, int y) {
  const float v = dog[layer].at(x, y);
  const bool is_max = v > 0;
  for (int l = layer - 1; l <= layer + 1; ++l) {
    const ImageF& img = dog[l];
    for (int dy = -1; dy <= 1; ++dy) {
      const float* row = img.row_ptr(y + dy);
      for (int dx = -1; dx <= 1; ++dx) {
        if (l == layer && dx == 0 && dy == 0) continue;
        const float n = row[x + dx];
        if (is_max ? !(v > n) : !(v < n)) return false;
      }
    }
  }
  return true;
}

bool solve3(const double H[3][3], const double b[3], double out[3]) {
  const double det = H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1]) -
                     H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0]) +
                     H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]);
  if (std::abs(det) < 1e-15) return false;
  for (int c = 0; c < 3; ++c) {
    double M[3][3];
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) M[r][k] = (k == c) ? b[r] : H[r][k];
    out[c] = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
              M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
              M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])) /
             det;
  }
  return true;
}

// Refines an extremum to sub-pixel/sub-scale precision and applies the contrast
// and edge tests. Returns false when rejected.
bool refine_extremum(const Pyramid& pyr, const ScaleSpaceConfig& cfg, int o, int& layer, int& x,
                     int& y, double offset[3], double& contrast) {
  const auto& dog = pyr.dog[o];
  const int S = pyr.scales;
  const int w = dog[0].width(), h = dog[0].height();
  double grad[3] = {0, 0, 0};
  int step = 0;
  for (; step < kMaxInterpSteps; ++step) {
    const ImageF& prev = dog[layer - 1];
    const ImageF& cur = dog[layer];
    const ImageF& next = dog[layer + 1];
    const double v2 = 2.0 * cur.at(x, y);
    grad[0] = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
    grad[1] = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
    grad[2] = 0.5 * (next.at(x, y) - prev.at(x, y));
    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
    const double dss = next.at(x, y) + prev.at(x, y) - v2;
    const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                               cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
    const double dxs = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) +
                               prev.at(x - 1, y));
    const double dys = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) +
                               prev.at(x, y - 1));
    const double H[3][3] = {{dxx, dxy, dxs}, {dxy, dyy, dys}, {dxs, dys, dss}};
    const double neg[3] = {-grad[0], -grad[1], -grad[2]};
    if (!solve3(H, neg, offset)) return false;
    if (std::abs(offset[0]) < 0.5 && std::abs(offset[1]) < 0.5 && std::abs(offset[2]) < 0.5) break;
    if (std::abs(offset[0]) > 1e4 || std::abs(offset[1]) > 1e4 || std::abs(offset[2]) > 1e4)
      return false;
    x += static_cast<int>(std::lround(offset[0]));
    y += static_cast<int>(std::lround(offset[1]));
    layer += static_cast<int>(std::lround(offset[2]));
    if (layer < 1 || layer > S || x < kBorder || x >= w - kBorder || y < kBorder ||
        y >= h - kBorder)
      return false;
  }
  if (step >= kMaxInterpSteps) return false;

  const ImageF& cur = dog[layer];
  contrast = cur.at(x, y) + 0.5 * (grad[0] * offset[0] + grad[1] * offset[1] + grad[2] * offset[2]);
  if (std::abs(contrast) < cfg.contrast_threshold) return false;

  const double v2 = 2.0 * cur.at(x, y);
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
  const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                             cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double r = cfg.edge_ratio_threshold;
  return det > 0 && tr * tr * r < (r + 1) * (r + 1) * det;
}

std::vector<float> dominant_orientations(const ImageF& img, int x, int y, double sigma_oct) {
  const double sigma = kOriSigmaFactor * sigma_oct;
  const int radius = static_cast<int>(std::lround(3.0 * sigma));
  const double expf_scale = -1.0 / (2.0 * sigma * sigma);
  std::array<double, kOriBins> raw{};
  for (int j = -radius; j <= radius; ++j) {
    const int py = y + j;
    if (py <= 0 || py >= img.height() - 1) continue;
    for (int i = -radius; i <= radius; ++i) {
      const int px = x + i;
      if (px <= 0 || px >= img.width() - 1) continue;
      const double dx = img.at(px + 1, py) - img.at(px - 1, py);
      const double dy = img.at(px, py + 1) - img.at(px, py - 1);
      const double mag = std::sqrt(dx * dx + dy * dy);
      double angle = std::atan2(dy, dx);
      if (angle < 0) angle += 2.0 * std::numbers::pi;
      int bin = static_cast<int>(std::lround(angle * kOriBins / (2.0 * std::numbers::pi)));
      bin %= kOriBins;
      raw[bin] += std::exp((i * i + j * j) * expf_scale) * mag;
    }
  }
  std::array<double, kOriBins> hist{};
  for (int i = 0; i < kOriBins; ++i) {
    auto at = [&](int k) { return raw[(k + kOriBins) % kOriBins]; };
    hist[i] = (at(i - 2) + at(i + 2)) * (1.0 / 16.0) + (at(i - 1) + at(i + 1)) * (4.0 / 16.0) +
              at(i) * (6.0 / 16.0);
  }
  const double max_val = *std::max_element(hist.begin(), hist.end());
  std::vector<float> out;
  if (max_val <= 0.0) return out;
  for (int i = 0; i < kOriBins; ++i) {
    const int l = (i + kOriBins - 1) % kOriBins, r = (i + 1) % kOriBins;
    if (hist[i] > hist[l] && hist[i] > hist[r] && hist[i] >= kOriPeakRatio * max_val) {
      double bin = i + 0.5 * (hist[l] - hist[r]) / (hist[l] - 2.0 * hist[i] + hist[r]);
      if (bin < 0) bin += kOriBins;
      if (bin >= kOriBins) bin -= kOriBins;
      float angle = static_cast<float>(bin * 2.0 * std::numbers::pi / kOriBins);
      if (angle >= static_cast<float>(2.0 * std::numbers::pi)) angle = 0.0f;
      out.push_back(angle);
    }
  }
  return out;
}

}  // namespace

std::vector<LocatedKeypoint> find_keypoints(const Pyramid& pyr, const ScaleSpaceConfig& cfg) {
  std::vector<LocatedKeypoint> out;
  const int S = pyr.scales;
  const float prefilter = static_cast<float>(0.5 * cfg.contrast_threshold);
  for (int o = 0; o < pyr.octaves(); ++o) {
    const auto& dog = pyr.dog[o];
    const int w = dog[0].width(), h = dog[0].height();
    for (int layer = 1; layer <= S; ++layer) {
      for (int y = kBorder; y < h - kBorder; ++y) {
        const float* row = dog[layer].row_ptr(y);
        for (int x = kBorder; x < w - kBorder; ++x) {
          if (std::abs(row[x]) <= prefilter) continue;
          if (!is_extremum(dog, layer, x, y)) continue;
          int lx = x, ly = y, ll = layer;
          double offset[3];
          double contrast = 0.0;
          if (!refine_extremum(pyr, cfg, o, ll, lx, ly, offset, contrast)) continue;

          const double layer_f = ll + offset[2];
          const double sigma_oct = pyr.sigma0 * std::pow(2.0, layer_f / S);
          const double f = pyr.octave_factor(o);
          LocatedKeypoint lk;
          lk.octave = o;
          lk.layer = ll;
          lk.x_oct = static_cast<float>(lx + offset[0]);
          lk.y_oct = static_cast<float>(ly + offset[1]);
          lk.sigma_oct = static_cast<float>(sigma_oct);
          lk.kp.x = static_cast<float>((lk.x_oct + 0.5) * f - 0.5);
          lk.kp.y = static_cast<float>((lk.y_oct + 0.5) * f - 0.5);
          lk.kp.scale = static_cast<float>(sigma_oct * f);
          lk.kp.response = static_cast<float>(std::abs(contrast));
          for (float angle : dominant_orientations(pyr.gauss[o][ll], lx, ly, sigma_oct)) {
            lk.kp.orientation = angle;
            out.push_back(lk);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

namespace {
constexpr int kMinImageSide = 32;
}

std::vector<Keypoint> detect_keypoints(const Image& img, const ScaleSpaceConfig& cfg,
                                       std::string* diagnostic) {
  cfg.validate();
  if (img.width() < kMinImageSide || img.height() < kMinImageSide) {
    if (diagnostic) *diagnostic = "image smaller than 32x32; no keypoints detected";
    return {};
  }
  const detail::Pyramid pyr = detail::build_pyramid(img, cfg, true);
  std::vector<Keypoint> out;
  for (const auto& lk : detail::find_keypoints(pyr, cfg)) out.push_back(lk.kp);
  return out;
}

float descriptor_distance(const Descriptor& a, const Descriptor& b) {
  float acc = 0.0f;
  for (int i = 0; i < kDescriptorSize; ++i) {
    const float d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace robovis::features
