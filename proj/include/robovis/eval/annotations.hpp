#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "robovis/imaging/detection.hpp"

namespace robovis::eval {

/// Image characteristics of a ground-truth instance. Normal excludes the others.
enum Condition : unsigned {
  kNormal = 1u,
  kBlur = 2u,
  kOccluded = 4u,
  kIllumination = 8u,
};
using ConditionFlags = unsigned;

/// "normal", "blur,occluded", ... in the fixed order blur, occluded, illumination.
std::string flags_to_string(ConditionFlags flags);
/// Throws FormatError (with `line` when nonzero) on unknown, empty or inconsistent flags.
ConditionFlags parse_flags(const std::string& text, int line = 0);

struct AnnotationRecord {
  std::string frame;
  std::string class_name;
  BoundingBox box;
  ConditionFlags flags = kNormal;

  bool occluded() const { return (flags & kOccluded) != 0; }
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// `frame class x_min y_min x_max y_max flags` per line; blank lines and `#` comments skipped.
std::vector<AnnotationRecord> parse_annotations(std::istream& in);
std::vector<AnnotationRecord> load_annotations(const std::string& path);
void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records);

/// `frame class x_min y_min x_max y_max score` per line.
std::vector<Detection> parse_detections(std::istream& in);
void write_detections(std::ostream& out, std::span<const Detection> dets);

}  // namespace robovis::eval
