#include "robovis/eval/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robovis/error.hpp"

namespace robovis::eval {

namespace {

std::uint8_t sat(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void fill_rect(Image& img, int x0, int y0, int x1, int y1, std::uint8_t v) {
  for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y)
    for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) img.at(x, y) = v;
}

void fill_disc(Image& img, double cx, double cy, double r, std::uint8_t v) {
  const int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
  const int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
  for (int y = std::max(0, y0); y <= std::min(img.height() - 1, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(img.width() - 1, x1); ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) img.at(x, y) = v;
}

// Random discs and rectangles with sizes in [min_size, max_size].
void scatter_shapes(Image& img, Rng& rng, int count, int min_size, int max_size) {
  for (int s = 0; s < count; ++s) {
    const int cx = rng.range(0, img.width() - 1), cy = rng.range(0, img.height() - 1);
    const int r = rng.range(min_size, std::max(min_size, max_size));
    const auto v = static_cast<std::uint8_t>(rng.range(0, 255));
    if (rng.below(2))
      fill_disc(img, cx, cy, r, v);
    else
      fill_rect(img, cx - r, cy - rng.range(1, r), cx + r, cy + rng.range(1, r), v);
  }
}

void add_noise(Image& img, Rng& rng, double sigma) {
  for (auto& p : img.pixels()) p = sat(p + rng.normal(0.0, sigma));
}

}  // namespace

Image clutter_background(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, static_cast<std::uint8_t>(rng.range(90, 160)));
  const int big = std::max(4, std::min(w, h) / 10);
  scatter_shapes(img, rng, w * h / 2500, big / 2, big);
  scatter_shapes(img, rng, w * h / 300, 2, std::max(3, big / 3));
  add_noise(img, rng, 2.0);
  return img;
}

Image textured_object(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, static_cast<std::uint8_t>(rng.range(60, 200)));
  const int big = std::max(4, std::min(w, h) / 6);
  scatter_shapes(img, rng, w * h / 1200, big / 2, big);
  scatter_shapes(img, rng, w * h / 250, 2, std::max(3, big / 3));
  return img;
}

Image textureless_object(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, static_cast<std::uint8_t>(rng.range(175, 225)));
  const int marks = rng.range(4, 6);
  const int margin = std::max(4, std::min(w, h) / 8);
  for (int m = 0; m < marks; ++m) {
    const int s = rng.range(std::max(3, std::min(w, h) / 14), std::max(4, std::min(w, h) / 7));
    const int cx = rng.range(margin + s, std::max(margin + s, w - margin - s));
    const int cy = rng.range(margin + s, std::max(margin + s, h - margin - s));
    const auto v = static_cast<std::uint8_t>(rng.range(0, 60));
    if (rng.below(2))
      fill_disc(img, cx, cy, s, v);
    else
      fill_rect(img, cx - s, cy - s / 2, cx + s, cy + s / 2, v);
  }
  return img;
}

void SceneSpec::validate() const {
  if (width < 8 || height < 8) throw InvalidArgument("scene too small");
  if (min_instances < 0 || max_instances < min_instances) throw InvalidArgument("bad instance range");
  if (!(min_scale > 0) || max_scale < min_scale) throw InvalidArgument("bad scale range");
  if (max_rotation < 0 || max_shear < 0) throw InvalidArgument("rotation and shear bounds must be non-negative");
  for (double p : {blur_probability, illumination_probability, occlusion_probability})
    if (!(p >= 0 && p <= 1)) throw InvalidArgument("probabilities must be in [0,1]");
  if (max_pose_attempts < 1) throw InvalidArgument("max_pose_attempts must be positive");
}

BoundingBox placement_box(const AffineMatrix& m, int w, int h) {
  double x_lo = 1e300, y_lo = 1e300, x_hi = -1e300, y_hi = -1e300;
  for (double cx : {-0.5, w - 0.5})
    for (double cy : {-0.5, h - 0.5}) {
      const double x = m[0] * cx + m[1] * cy + m[2], y = m[3] * cx + m[4] * cy + m[5];
      x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
    }
  // Pixel centres sit on integers, so the covered pixel span is shifted by half a pixel.
  constexpr double eps = 1e-9;
  return {static_cast<int>(std::floor(x_lo + 0.5 + eps)), static_cast<int>(std::floor(y_lo + 0.5 + eps)),
          static_cast<int>(std::ceil(x_hi + 0.5 - eps)), static_cast<int>(std::ceil(y_hi + 0.5 - eps))};
}

Scene render_scene(std::span<const ObjectImage> models, const Image& background, std::span<const Placement> placements,
                   const std::string& frame) {
  Scene scene{frame, background, {}};
  for (const Placement& p : placements) {
    if (p.model >= models.size()) throw InvalidArgument("placement refers to a missing model");
    const ObjectImage& obj = models[p.model];
    Image src = obj.image;
    if (p.flags & kBlur) src = gaussian_blur(src, 2.5);
    if (p.flags & kIllumination)
      for (auto& v : src.pixels()) v = sat(0.4 * v + 10.0);
    warp_affine_into(src, p.pose, scene.image);
    const BoundingBox box = clip(placement_box(p.pose, obj.image.width(), obj.image.height()), scene.image.size());
    if (p.flags & kOccluded) {
      // Cover 35-50% of the box from one side with an unrelated surface.
      Rng rng(p.seed);
      const double frac = rng.uniform(0.35, 0.5);
      const int side = static_cast<int>(rng.below(4));
      BoundingBox occ = box;
      const int dw = static_cast<int>(std::lround(box.width() * frac));
      const int dh = static_cast<int>(std::lround(box.height() * frac));
      if (side == 0) occ.x_max = box.x_min + dw;
      if (side == 1) occ.x_min = box.x_max - dw;
      if (side == 2) occ.y_max = box.y_min + dh;
      if (side == 3) occ.y_min = box.y_max - dh;
      const Image cover = clutter_background(std::max(1, occ.width()), std::max(1, occ.height()), rng.next());
      for (int y = occ.y_min; y < occ.y_max; ++y)
        for (int x = occ.x_min; x < occ.x_max; ++x) scene.image.at(x, y) = cover.at(x - occ.x_min, y - occ.y_min);
    }
    scene.truth.push_back({frame, obj.class_name, box, p.flags});
  }
  return scene;
}

Scene generate_synthetic_scene(std::span<const ObjectImage> models, std::span<const Image> backgrounds,
                               const SceneSpec& spec, std::uint64_t seed, const std::string& frame) {
  spec.validate();
  if (models.empty() || backgrounds.empty()) throw InvalidArgument("need at least one model and one background");
  Rng rng(seed);
  Image bg = backgrounds[rng.below(backgrounds.size())];
  if (bg.width() != spec.width || bg.height() != spec.height) bg = resize_bilinear(bg, spec.width, spec.height);

  const int n = rng.range(spec.min_instances, spec.max_instances);
  std::vector<Placement> placements;
  std::vector<BoundingBox> taken;
  for (int i = 0; i < n; ++i) {
    const std::size_t model = rng.below(models.size());
    const Image& img = models[model].image;
    for (int attempt = 0; attempt < spec.max_pose_attempts; ++attempt) {
      const double s = rng.uniform(spec.min_scale, spec.max_scale);
      const double th = rng.uniform(-spec.max_rotation, spec.max_rotation);
      const double sh = rng.uniform(-spec.max_shear, spec.max_shear);
      const double co = std::cos(th), si = std::sin(th);
      const double a = s * co, b = s * (co * sh - si), c = s * si, d = s * (si * sh + co);
      // Place the model centre uniformly; the box test below rejects poses leaving the frame.
      const double mx = 0.5 * (img.width() - 1), my = 0.5 * (img.height() - 1);
      const double px = rng.uniform(0, spec.width), py = rng.uniform(0, spec.height);
      const AffineMatrix pose{a, b, px - a * mx - b * my, c, d, py - c * mx - d * my};
      const BoundingBox box = placement_box(pose, img.width(), img.height());
      if (!box.inside({spec.width, spec.height})) continue;
      if (std::any_of(taken.begin(), taken.end(), [&](const BoundingBox& t) { return intersection_area(t, box) > 0; }))
        continue;
      ConditionFlags flags = 0;
      if (rng.uniform() < spec.blur_probability) flags |= kBlur;
      if (rng.uniform() < spec.occlusion_probability) flags |= kOccluded;
      if (rng.uniform() < spec.illumination_probability) flags |= kIllumination;
      if (flags == 0) flags = kNormal;
      placements.push_back({model, pose, flags, rng.next()});
      taken.push_back(box);
      break;
    }
  }
  return render_scene(models, bg, placements, frame);
}

Image blob_free_clutter(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, static_cast<std::uint8_t>(rng.range(40, 110)));
  for (int i = 0, n = std::max(1, w * h / 5000); i < n; ++i) {
    const int x = rng.range(-20, w - 1), y = rng.range(-20, h - 1);
    fill_rect(img, x, y, x + rng.range(20, 120), y + rng.range(20, 120), static_cast<std::uint8_t>(rng.range(30, 130)));
  }
  const int items = std::max(1, w * h / 700);
  for (int i = 0; i < items; ++i) {
    const double cx = rng.uniform(0, w), cy = rng.uniform(0, h);
    const auto v = static_cast<std::uint8_t>(rng.range(150, 255));
    switch (rng.below(4)) {
      case 0: {  // bar at a random angle
        const double len = rng.uniform(12, 60), half = rng.uniform(1.0, 2.5), th = rng.uniform(0, std::numbers::pi);
        const double ux = std::cos(th), uy = std::sin(th);
        for (int y = std::max(0, int(cy - len)); y < std::min(h, int(cy + len) + 1); ++y)
          for (int x = std::max(0, int(cx - len)); x < std::min(w, int(cx + len) + 1); ++x) {
            const double along = (x - cx) * ux + (y - cy) * uy, across = -(x - cx) * uy + (y - cy) * ux;
            if (std::abs(along) <= len / 2 && std::abs(across) <= half) img.at(x, y) = v;
          }
        break;
      }
      case 1: {  // axis-aligned square
        const int s = rng.range(5, 30);
        fill_rect(img, int(cx), int(cy), int(cx) + s, int(cy) + s, v);
        break;
      }
      case 2: {  // ring with a background interior
        const double r = rng.uniform(5, 18), t = rng.uniform(1.5, 3.0);
        for (int y = std::max(0, int(cy - r)); y < std::min(h, int(cy + r) + 1); ++y)
          for (int x = std::max(0, int(cx - r)); x < std::min(w, int(cx + r) + 1); ++x) {
            const double d = std::hypot(x - cx, y - cy);
            if (d <= r && d >= r - t) img.at(x, y) = v;
          }
        break;
      }
      default:
        fill_disc(img, cx, cy, rng.uniform(0.8, 2.0), v);
    }
  }
  add_noise(img, rng, 6.0);
  return img;
}

namespace {

// Soft bright ellipse of radius r around (cx, cy), blended over the image.
void draw_blob(Image& img, double cx, double cy, double r, Rng& rng) {
  const double q = rng.uniform(0.8, 1.0), phi = rng.uniform(0, std::numbers::pi);
  const double peak = rng.uniform(170, 255), soft = std::max(0.5, r * rng.uniform(0.05, 0.2));
  const double noise = rng.uniform(0, 10);
  const double co = std::cos(phi), si = std::sin(phi);
  const double reach = r + 2 * soft;
  for (int y = std::max(0, int(cy - reach)); y < std::min(img.height(), int(cy + reach) + 2); ++y)
    for (int x = std::max(0, int(cx - reach)); x < std::min(img.width(), int(cx + reach) + 2); ++x) {
      const double u = (x - cx) * co + (y - cy) * si, v = (-(x - cx) * si + (y - cy) * co) / q;
      const double alpha = std::clamp((r - std::hypot(u, v)) / soft + 0.5, 0.0, 1.0);
      if (alpha <= 0) continue;
      img.at(x, y) = sat(img.at(x, y) * (1 - alpha) + (peak + rng.normal(0, noise)) * alpha);
    }
}

}  // namespace

Image blob_window(int side, std::uint64_t seed) {
  Rng rng(seed);
  Image img = blob_free_clutter(side, side, rng.next());
  const double r = side * rng.uniform(0.26, 0.34);
  const double cx = side * (0.5 + rng.uniform(-0.05, 0.05)) - 0.5, cy = side * (0.5 + rng.uniform(-0.05, 0.05)) - 0.5;
  draw_blob(img, cx, cy, r, rng);
  return img;
}

Scene blob_scene(int w, int h, int count, int min_side, int max_side, std::uint64_t seed, const std::string& frame) {
  if (min_side < 4 || max_side < min_side || max_side > std::min(w, h)) throw InvalidArgument("bad blob size range");
  Rng rng(seed);
  Scene scene{frame, blob_free_clutter(w, h, rng.next()), {}};
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const int side = rng.range(min_side, max_side);
      const int x0 = rng.range(0, w - side), y0 = rng.range(0, h - side);
      const BoundingBox box{x0, y0, x0 + side, y0 + side};
      const BoundingBox guard{x0 - side / 4, y0 - side / 4, x0 + side + side / 4, y0 + side + side / 4};
      if (std::any_of(scene.truth.begin(), scene.truth.end(),
                      [&](const AnnotationRecord& t) { return intersection_area(t.box, guard) > 0; }))
        continue;
      const double r = side * rng.uniform(0.26, 0.34);
      const double cx = x0 + side * (0.5 + rng.uniform(-0.05, 0.05)) - 0.5;
      const double cy = y0 + side * (0.5 + rng.uniform(-0.05, 0.05)) - 0.5;
      draw_blob(scene.image, cx, cy, r, rng);
      scene.truth.push_back({frame, "blob", box, kNormal});
      break;
    }
  }
  return scene;
}

}  // namespace robovis::eval
