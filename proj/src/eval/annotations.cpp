#include "robovis/eval/annotations.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "robovis/error.hpp"

namespace robovis::eval {

namespace {

struct FlagName {
  Condition flag;
  const char* name;
};
constexpr FlagName kFlagNames[] = {{kBlur, "blur"}, {kOccluded, "occluded"}, {kIllumination, "illumination"}};

bool content_line(std::string& line) {
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  return line.find_first_not_of(" \t\r") != std::string::npos;
}

BoundingBox read_box(std::istringstream& ss, int line_no) {
  BoundingBox b;
  if (!(ss >> b.x_min >> b.y_min >> b.x_max >> b.y_max)) throw FormatError("expected four box coordinates", line_no);
  if (!b.valid()) throw FormatError("empty bounding box", line_no);
  return b;
}

}  // namespace

std::string flags_to_string(ConditionFlags flags) {
  if (flags == kNormal) return "normal";
  std::string out;
  for (const FlagName& f : kFlagNames)
    if (flags & f.flag) out += (out.empty() ? "" : ",") + std::string(f.name);
  if (out.empty() || (flags & kNormal)) throw InvalidArgument("inconsistent condition flags");
  return out;
}

ConditionFlags parse_flags(const std::string& text, int line) {
  ConditionFlags flags = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string tok = text.substr(start, comma - start);
    ConditionFlags bit = 0;
    if (tok == "normal") bit = kNormal;
    for (const FlagName& f : kFlagNames)
      if (tok == f.name) bit = f.flag;
    if (bit == 0) throw FormatError("unknown condition flag '" + tok + "'", line);
    if (flags & bit) throw FormatError("repeated condition flag '" + tok + "'", line);
    flags |= bit;
    start = comma + 1;
  }
  if ((flags & kNormal) && flags != kNormal) throw FormatError("'normal' cannot be combined with other flags", line);
  return flags;
}

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_line(line)) continue;
    std::istringstream ss(line);
    AnnotationRecord r;
    if (!(ss >> r.frame >> r.class_name)) throw FormatError("expected frame and class", line_no);
    r.box = read_box(ss, line_no);
    std::string flags;
    if (!(ss >> flags)) throw FormatError("missing condition flags", line_no);
    r.flags = parse_flags(flags, line_no);
    std::string extra;
    if (ss >> extra) throw FormatError("trailing field '" + extra + "'", line_no);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotation file " + path);
  return parse_annotations(in);
}

void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records) {
  for (const AnnotationRecord& r : records)
    out << r.frame << ' ' << r.class_name << ' ' << r.box.x_min << ' ' << r.box.y_min << ' ' << r.box.x_max << ' '
        << r.box.y_max << ' ' << flags_to_string(r.flags) << '\n';
}

std::vector<Detection> parse_detections(std::istream& in) {
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_line(line)) continue;
    std::istringstream ss(line);
    Detection d;
    if (!(ss >> d.frame >> d.class_name)) throw FormatError("expected frame and class", line_no);
    d.box = read_box(ss, line_no);
    if (!(ss >> d.score) || !std::isfinite(d.score)) throw FormatError("missing or non-finite score", line_no);
    std::string extra;
    if (ss >> extra) throw FormatError("trailing field '" + extra + "'", line_no);
    out.push_back(std::move(d));
  }
  return out;
}

void write_detections(std::ostream& out, std::span<const Detection> dets) {
  char score[40];
  for (const Detection& d : dets) {
    std::snprintf(score, sizeof score, "%.17g", d.score);
    out << (d.frame.empty() ? "-" : d.frame) << ' ' << d.class_name << ' ' << d.box.x_min << ' ' << d.box.y_min << ' '
        << d.box.x_max << ' ' << d.box.y_max << ' ' << score << '\n';
  }
}

}  // namespace robovis::eval
