#include "robovis/cascade/haar.hpp"

#include <algorithm>
#include <cmath>

#include "robovis/error.hpp"

namespace robovis::cascade {

namespace {

struct Layout {
  int cols, rows;
};

Layout layout(HaarKind k) {
  switch (k) {
    case HaarKind::EdgeVertical: return {2, 1};
    case HaarKind::EdgeHorizontal: return {1, 2};
    case HaarKind::Line: return {3, 1};
    case HaarKind::Checker: return {2, 2};
  }
  throw InvalidArgument("unknown Haar feature kind");
}

}  // namespace

int HaarFeature::width() const { return layout(kind).cols * cell_w; }
int HaarFeature::height() const { return layout(kind).rows * cell_h; }

int HaarFeature::rect_count() const {
  switch (kind) {
    case HaarKind::Line: return 3;
    case HaarKind::Checker: return 4;
    default: return 2;
  }
}

std::array<HaarRect, 4> HaarFeature::rects() const {
  const int w = cell_w, h = cell_h;
  switch (kind) {
    case HaarKind::EdgeVertical:
      return {{{x, y, w, h, -1}, {x + w, y, w, h, 1}, {}, {}}};
    case HaarKind::EdgeHorizontal:
      return {{{x, y, w, h, -1}, {x, y + h, w, h, 1}, {}, {}}};
    case HaarKind::Line:
      return {{{x, y, w, h, -1}, {x + w, y, w, h, 2}, {x + 2 * w, y, w, h, -1}, {}}};
    case HaarKind::Checker:
      return {{{x, y, w, h, 1}, {x + w, y, w, h, -1}, {x, y + h, w, h, -1}, {x + w, y + h, w, h, 1}}};
  }
  throw InvalidArgument("unknown Haar feature kind");
}

HaarFeature HaarFeature::scaled(double scale) const {
  HaarFeature f = *this;
  f.x = static_cast<int>(std::lround(x * scale));
  f.y = static_cast<int>(std::lround(y * scale));
  f.cell_w = std::max(1, static_cast<int>(std::lround(cell_w * scale)));
  f.cell_h = std::max(1, static_cast<int>(std::lround(cell_h * scale)));
  return f;
}

std::vector<HaarFeature> enumerate_features(int window_w, int window_h) {
  std::vector<HaarFeature> out;
  for (HaarKind kind : {HaarKind::EdgeVertical, HaarKind::EdgeHorizontal, HaarKind::Line, HaarKind::Checker}) {
    const Layout l = layout(kind);
    for (int ch = 1; ch * l.rows <= window_h; ++ch)
      for (int cw = 1; cw * l.cols <= window_w; ++cw)
        for (int y = 0; y + ch * l.rows <= window_h; ++y)
          for (int x = 0; x + cw * l.cols <= window_w; ++x) out.push_back({kind, x, y, cw, ch});
  }
  return out;
}

std::int64_t haar_raw_unchecked(const HaarFeature& f, const IntegralImage& ii, int ox, int oy) {
  const auto rs = f.rects();
  std::int64_t sum = 0;
  for (int i = 0; i < f.rect_count(); ++i) {
    const HaarRect& r = rs[i];
    const int x0 = ox + r.x, y0 = oy + r.y;
    sum += r.weight * ii.rect_sum_unchecked(x0, y0, x0 + r.w, y0 + r.h);
  }
  return sum;
}

std::int64_t haar_raw(const HaarFeature& f, const IntegralImage& ii, int ox, int oy) {
  if (ox < 0 || oy < 0 || ox + f.x < 0 || oy + f.y < 0 || f.x < 0 || f.y < 0 ||
      ox + f.x + f.width() > ii.width() || oy + f.y + f.height() > ii.height())
    throw BoundsError("Haar feature leaves the image");
  return haar_raw_unchecked(f, ii, ox, oy);
}

double window_sigma(const IntegralImage& ii, const IntegralImage& sq, int x, int y, int w, int h) {
  const double n = static_cast<double>(w) * h;
  const double s = static_cast<double>(ii.rect_sum_unchecked(x, y, x + w, y + h));
  const double s2 = static_cast<double>(sq.rect_sum_unchecked(x, y, x + w, y + h));
  const double var = (s2 - s * s / n) / n;
  return var > 1.0 ? std::sqrt(var) : 1.0;
}

float eval_haar(const HaarFeature& f, const IntegralImage& ii, const IntegralImage& sq, const Window& window,
                double scale) {
  const BoundingBox& b = window.box();
  if (!b.inside({ii.width(), ii.height()})) throw BoundsError("window leaves the image");
  if (!(scale > 0)) throw InvalidArgument("scale must be positive");
  const HaarFeature s = f.scaled(scale);
  if (!s.fits(b.width(), b.height())) throw InvalidArgument("scaled Haar feature overflows the window");
  const std::int64_t raw = haar_raw_unchecked(s, ii, b.x_min, b.y_min);
  const double sigma = window_sigma(ii, sq, b.x_min, b.y_min, b.width(), b.height());
  return normalize_response(raw, sigma, s.cell_w * s.cell_h);
}

}  // namespace robovis::cascade
