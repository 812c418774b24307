#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace robovis::sift {

struct Point2 {
  double x = 0.0, y = 0.0;
};

/// A model point and the image point it was matched to.
struct Correspondence {
  Point2 model;
  Point2 image;
  std::size_t query_index = 0;
  int model_keypoint_index = 0;
};

/// image = A * model + t, with A = [a b; c d] and t = (tx, ty).
struct AffineTransform {
  double a = 1, b = 0, c = 0, d = 1, tx = 0, ty = 0;

  Point2 apply(Point2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
  double det() const { return a * d - b * c; }
  /// Column norms of the linear part: how much the model x and y axes stretch.
  double x_scale() const;
  double y_scale() const;

  static AffineTransform similarity(double scale, double angle, double tx, double ty);
};

/// Least-squares affine fit, exact for three points. Throws SingularError when
/// the model points are (near-)collinear or the fitted linear part is singular.
AffineTransform fit_affine_least_squares(std::span<const Correspondence> pts);

/// Weighted variant; entries with weight 0 are ignored.
AffineTransform fit_affine_weighted(std::span<const Correspondence> pts,
                                    std::span<const double> weights);

double reprojection_error(const AffineTransform& t, const Correspondence& c);

/// Mean distance between the four corners of a w x h model mapped by `a` and `b`.
double corner_error(const AffineTransform& a, const AffineTransform& b, double w, double h);

}  // namespace robovis::sift
