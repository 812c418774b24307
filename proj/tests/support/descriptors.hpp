#pragma once

// Synthetic SIFT-like descriptor pools for search tests.

#include <algorithm>
#include <cmath>

#include "robovis/features/keypoints.hpp"
#include "robovis/random.hpp"

namespace robovis::testing {

inline void normalize(features::Descriptor& d) {
  double n = 0.0;
  for (float v : d) n += double(v) * v;
  n = std::sqrt(n);
  if (n > 0)
    for (float& v : d) v = static_cast<float>(v / n);
}

/// Non-negative, sparse-ish, unit-norm vector.
inline features::Descriptor random_descriptor(Rng& rng) {
  features::Descriptor d;
  for (float& v : d) {
    const double u = rng.uniform();
    v = u < 0.4 ? 0.0f : static_cast<float>(u * u);
  }
  normalize(d);
  return d;
}

/// Copy of `d` with additive gaussian noise, clamped at zero and renormalized.
inline features::Descriptor perturb(const features::Descriptor& d, double sigma, Rng& rng) {
  features::Descriptor out = d;
  for (float& v : out) v = std::max(0.0f, static_cast<float>(v + rng.normal(0.0, sigma)));
  normalize(out);
  return out;
}

}  // namespace robovis::testing
