#pragma once

#include <string>

#include "robovis/imaging/geometry.hpp"

namespace robovis {

/// One detector output, in the shared exchange representation.
struct Detection {
  std::string frame;
  std::string class_name;
  BoundingBox box;
  double score = 0.0;
};

}  // namespace robovis
