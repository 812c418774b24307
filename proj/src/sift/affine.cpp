#include "robovis/sift/affine.hpp"

#include <cmath>
#include <vector>

#include "robovis/error.hpp"

namespace robovis::sift {

double AffineTransform::x_scale() const { return std::hypot(a, c); }
double AffineTransform::y_scale() const { return std::hypot(b, d); }

AffineTransform AffineTransform::similarity(double scale, double angle, double tx, double ty) {
  const double cs = scale * std::cos(angle), sn = scale * std::sin(angle);
  return {cs, -sn, sn, cs, tx, ty};
}

AffineTransform fit_affine_weighted(std::span<const Correspondence> pts,
                                    std::span<const double> weights) {
  if (weights.size() != pts.size()) throw InvalidArgument("one weight per correspondence required");
  double sw = 0, mx = 0, my = 0, ix = 0, iy = 0;
  int used = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double w = weights[k];
    if (!(w > 0)) continue;
    ++used;
    sw += w;
    mx += w * pts[k].model.x;
    my += w * pts[k].model.y;
    ix += w * pts[k].image.x;
    iy += w * pts[k].image.y;
  }
  if (used < 3) throw SingularError("affine fit needs at least 3 weighted correspondences");
  mx /= sw, my /= sw, ix /= sw, iy /= sw;

  double cxx = 0, cxy = 0, cyy = 0, bxx = 0, bxy = 0, byx = 0, byy = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double w = weights[k];
    if (!(w > 0)) continue;
    const double u = pts[k].model.x - mx, v = pts[k].model.y - my;
    const double p = pts[k].image.x - ix, q = pts[k].image.y - iy;
    cxx += w * u * u;
    cxy += w * u * v;
    cyy += w * v * v;
    bxx += w * p * u;
    bxy += w * p * v;
    byx += w * q * u;
    byy += w * q * v;
  }
  const double det = cxx * cyy - cxy * cxy, tr = cxx + cyy;
  if (!(tr > 0) || det / (tr * tr) < 1e-12)
    throw SingularError("model points are collinear; affine transform is undetermined");

  AffineTransform t;
  t.a = (bxx * cyy - bxy * cxy) / det;
  t.b = (bxy * cxx - bxx * cxy) / det;
  t.c = (byx * cyy - byy * cxy) / det;
  t.d = (byy * cxx - byx * cxy) / det;
  if (std::abs(t.det()) <= 1e-9) throw SingularError("fitted affine transform is singular");
  t.tx = ix - (t.a * mx + t.b * my);
  t.ty = iy - (t.c * mx + t.d * my);
  return t;
}

AffineTransform fit_affine_least_squares(std::span<const Correspondence> pts) {
  const std::vector<double> ones(pts.size(), 1.0);
  return fit_affine_weighted(pts, ones);
}

double reprojection_error(const AffineTransform& t, const Correspondence& c) {
  const Point2 p = t.apply(c.model);
  return std::hypot(p.x - c.image.x, p.y - c.image.y);
}

double corner_error(const AffineTransform& a, const AffineTransform& b, double w, double h) {
  const Point2 corners[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  double sum = 0;
  for (const Point2& c : corners) {
    const Point2 p = a.apply(c), q = b.apply(c);
    sum += std::hypot(p.x - q.x, p.y - q.y);
  }
  return sum / 4.0;
}

}  // namespace robovis::sift
